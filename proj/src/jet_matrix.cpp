#include "stokesdtn/jet_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "stokesdtn/errors.hpp"

namespace stokesdtn {

Jet JetMatrix::trace() const {
  Jet t = at(0, 0);
  for (int i = 1; i < std::min(rows_, cols_); ++i) t = t + at(i, i);
  return t;
}

int JetMatrix::min_order() const {
  int k = e_.empty() ? -1 : e_[0].order();
  for (const auto& j : e_) k = std::min(k, j.order());
  return k;
}

double JetMatrix::max_abs(int through_order) const {
  double mx = 0.0;
  for (const auto& j : e_) mx = std::max(mx, j.max_abs(through_order));
  return mx;
}

JetMatrix JetMatrix::partial(int var) const {
  JetMatrix r = *this;
  for (auto& j : r.e_) j = stokesdtn::partial(j, var);
  return r;
}

JetMatrix JetMatrix::transposed() const {
  JetMatrix r = *this;
  r.rows_ = cols_;
  r.cols_ = rows_;
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
  return r;
}

JetMatrix operator+(const JetMatrix& a, const JetMatrix& b) {
  JetMatrix r = a;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r.at(i, j) = a.at(i, j) + b.at(i, j);
  return r;
}

JetMatrix operator-(const JetMatrix& a, const JetMatrix& b) {
  JetMatrix r = a;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r.at(i, j) = a.at(i, j) - b.at(i, j);
  return r;
}

JetMatrix operator*(const JetMatrix& a, const JetMatrix& b) {
  if (a.cols() != b.rows()) throw UsageError("JetMatrix: dimension mismatch in product");
  JetMatrix out(a.at(0, 0).space(), a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      Jet acc = a.at(i, 0) * b.at(0, j);
      for (int l = 1; l < a.cols(); ++l) acc = acc + a.at(i, l) * b.at(l, j);
      out.at(i, j) = acc;
    }
  return out;
}

JetMatrix operator*(const Jet& s, const JetMatrix& a) {
  JetMatrix r = a;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r.at(i, j) = s * a.at(i, j);
  return r;
}

JetMatrix operator*(Complex s, const JetMatrix& a) {
  JetMatrix r = a;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r.at(i, j) = s * a.at(i, j);
  return r;
}

std::vector<Jet> operator*(const JetMatrix& a, const std::vector<Jet>& v) {
  if (a.cols() != static_cast<int>(v.size())) throw UsageError("JetMatrix: dimension mismatch in apply");
  std::vector<Jet> out;
  out.reserve(static_cast<size_t>(a.rows()));
  for (int i = 0; i < a.rows(); ++i) {
    Jet acc = a.at(i, 0) * v[0];
    for (int j = 1; j < a.cols(); ++j) acc = acc + a.at(i, j) * v[static_cast<size_t>(j)];
    out.push_back(acc);
  }
  return out;
}

namespace {

// Plain Gauss-Jordan with partial pivoting for the base-point values.
std::vector<Complex> invert_numeric(std::vector<Complex> a, int n) {
  std::vector<Complex> inv(static_cast<size_t>(n) * static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) inv[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(i)] = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[static_cast<size_t>(r) * static_cast<size_t>(n) + static_cast<size_t>(col)]) > std::abs(a[static_cast<size_t>(piv) * static_cast<size_t>(n) + static_cast<size_t>(col)])) piv = r;
    if (std::abs(a[static_cast<size_t>(piv) * static_cast<size_t>(n) + static_cast<size_t>(col)]) < 1e-14)
      throw SingularInputError("matrix inverse: singular base-point values");
    if (piv != col)
      for (int c = 0; c < n; ++c) {
        std::swap(a[static_cast<size_t>(piv) * static_cast<size_t>(n) + static_cast<size_t>(c)], a[static_cast<size_t>(col) * static_cast<size_t>(n) + static_cast<size_t>(c)]);
        std::swap(inv[static_cast<size_t>(piv) * static_cast<size_t>(n) + static_cast<size_t>(c)], inv[static_cast<size_t>(col) * static_cast<size_t>(n) + static_cast<size_t>(c)]);
      }
    const Complex d = a[static_cast<size_t>(col) * static_cast<size_t>(n) + static_cast<size_t>(col)];
    for (int c = 0; c < n; ++c) {
      a[static_cast<size_t>(col) * static_cast<size_t>(n) + static_cast<size_t>(c)] /= d;
      inv[static_cast<size_t>(col) * static_cast<size_t>(n) + static_cast<size_t>(c)] /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const Complex f = a[static_cast<size_t>(r) * static_cast<size_t>(n) + static_cast<size_t>(col)];
      if (f == Complex(0.0, 0.0)) continue;
      for (int c = 0; c < n; ++c) {
        a[static_cast<size_t>(r) * static_cast<size_t>(n) + static_cast<size_t>(c)] -= f * a[static_cast<size_t>(col) * static_cast<size_t>(n) + static_cast<size_t>(c)];
        inv[static_cast<size_t>(r) * static_cast<size_t>(n) + static_cast<size_t>(c)] -= f * inv[static_cast<size_t>(col) * static_cast<size_t>(n) + static_cast<size_t>(c)];
      }
    }
  }
  return inv;
}

}  // namespace

JetMatrix inverse(const JetMatrix& g) {
  if (g.rows() != g.cols()) throw UsageError("JetMatrix inverse: must be square");
  const int n = g.rows();
  const auto sp = g.at(0, 0).space();
  const int target = g.min_order();
  if (target < 0) throw OrderExhaustedError("JetMatrix inverse: no trustworthy order");

  std::vector<Complex> base(static_cast<size_t>(n) * static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) base[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)] = g.at(i, j).value();
  const auto inv0 = invert_numeric(std::move(base), n);

  JetMatrix x(sp, n, n, target);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      x.at(i, j) = Jet::constant(sp, inv0[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)], target);

  const JetMatrix two_i = Complex(2.0, 0.0) * JetMatrix::identity(sp, n, target);
  for (int correct = 0; correct < target; correct = 2 * correct + 1) x = x * (two_i - g * x);
  return x;
}

double max_abs_diff(const JetMatrix& a, const JetMatrix& b, int through_order) {
  double mx = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) mx = std::max(mx, max_abs_diff(a.at(i, j), b.at(i, j), through_order));
  return mx;
}

}  // namespace stokesdtn
