#include "stokesdtn/jet.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace stokesdtn {

namespace {

// Below this many pair-table entries the OpenMP fork costs more than the work.
constexpr size_t kParallelPairThreshold = 1u << 16;

void enumerate_monomials(int vars, int max_order, std::vector<MultiIndex>* out) {
  // graded order: all monomials of each total degree, lex within the degree
  std::vector<MultiIndex> degree_bucket;
  for (int deg = 0; deg <= max_order; ++deg) {
    degree_bucket.clear();
    std::vector<int> e(static_cast<size_t>(vars), 0);
    // iterate compositions of deg into `vars` parts
    auto emit = [&]() {
      MultiIndex mi(vars);
      for (int v = 0; v < vars; ++v) mi.set(v, e[static_cast<size_t>(v)]);
      degree_bucket.push_back(mi);
    };
    if (vars == 0) {
      if (deg == 0) out->push_back(MultiIndex(0));
      continue;
    }
    // standard odometer over exponents summing to deg
    std::function<void(int, int)> rec = [&](int v, int rem) {
      if (v == vars - 1) {
        e[static_cast<size_t>(v)] = rem;
        emit();
        return;
      }
      for (int d = 0; d <= rem; ++d) {
        e[static_cast<size_t>(v)] = d;
        rec(v + 1, rem - d);
      }
    };
    rec(0, deg);
    std::sort(degree_bucket.begin(), degree_bucket.end());
    out->insert(out->end(), degree_bucket.begin(), degree_bucket.end());
  }
}

}  // namespace

JetSpace::JetSpace(int num_x, int num_xi, int max_order, std::vector<double> base)
    : num_x_(num_x), num_xi_(num_xi), max_order_(max_order), base_(std::move(base)) {
  if (num_x_ < 0 || num_xi_ < 0 || vars() > MultiIndex::kMaxVars)
    throw UsageError("JetSpace: unsupported variable count");
  if (max_order_ < 0 || max_order_ > 30) throw UsageError("JetSpace: unsupported truncation order");
  if (static_cast<int>(base_.size()) != vars())
    throw UsageError("JetSpace: base point length must equal the variable count");

  enumerate_monomials(vars(), max_order_, &monomials_);
  for (size_t i = 0; i < monomials_.size(); ++i) index_[monomials_[i]] = static_cast<int>(i);
  degree_offset_.assign(static_cast<size_t>(max_order_) + 2, 0);
  for (size_t i = 0; i < monomials_.size(); ++i) {
    int d = monomials_[i].degree();
    degree_offset_[static_cast<size_t>(d) + 1] = static_cast<int>(i) + 1;
  }
  for (size_t d = 1; d < degree_offset_.size(); ++d)
    degree_offset_[d] = std::max(degree_offset_[d], degree_offset_[d - 1]);

  // multiplication table grouped by output monomial
  const int m = static_cast<int>(monomials_.size());
  std::vector<std::vector<Pair>> buckets(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    const int di = monomials_[static_cast<size_t>(i)].degree();
    for (int j = 0; j < m; ++j) {
      if (di + monomials_[static_cast<size_t>(j)].degree() > max_order_) break;  // graded order
      const MultiIndex prod = monomials_[static_cast<size_t>(i)].plus(monomials_[static_cast<size_t>(j)]);
      buckets[static_cast<size_t>(index_.at(prod))].push_back({i, j});
    }
  }
  pair_begin_.assign(static_cast<size_t>(m) + 1, 0);
  for (int t = 0; t < m; ++t)
    pair_begin_[static_cast<size_t>(t) + 1] = pair_begin_[static_cast<size_t>(t)] + static_cast<int64_t>(buckets[static_cast<size_t>(t)].size());
  pairs_.reserve(static_cast<size_t>(pair_begin_.back()));
  for (auto& b : buckets) pairs_.insert(pairs_.end(), b.begin(), b.end());
}

std::shared_ptr<const JetSpace> JetSpace::make(int num_x, int num_xi, int max_order,
                                               std::vector<double> base_point) {
  return std::shared_ptr<const JetSpace>(new JetSpace(num_x, num_xi, max_order, std::move(base_point)));
}

int JetSpace::count_through(int k) const {
  if (k < 0) return 0;
  k = std::min(k, max_order_);
  return degree_offset_[static_cast<size_t>(k) + 1];
}

int JetSpace::index_of(const MultiIndex& m) const {
  auto it = index_.find(m);
  return it == index_.end() ? -1 : it->second;
}

bool JetSpace::same_layout(const JetSpace& o) const {
  return num_x_ == o.num_x_ && num_xi_ == o.num_xi_ && max_order_ == o.max_order_ && base_ == o.base_;
}

void require_compatible(const Jet& a, const Jet& b) {
  if (!a.valid() || !b.valid()) throw IncompatibleJetsError("jet arithmetic on an empty jet");
  if (a.space() != b.space() && !a.space()->same_layout(*b.space()))
    throw IncompatibleJetsError("jets live in different spaces (base point / layout / order)");
}

Jet Jet::zero(std::shared_ptr<const JetSpace> sp, int order) {
  Jet j;
  j.space_ = std::move(sp);
  j.order_ = (order == -2) ? j.space_->max_order() : std::min(order, j.space_->max_order());
  return j;
}

Jet Jet::constant(std::shared_ptr<const JetSpace> sp, Complex v, int order) {
  Jet j = zero(std::move(sp), order);
  if (v != Complex(0.0, 0.0) && j.order_ >= 0) j.coeffs_[MultiIndex(j.space_->vars())] = v;
  return j;
}

Jet Jet::variable(std::shared_ptr<const JetSpace> sp, int var) {
  if (var < 0 || var >= sp->vars()) throw UsageError("Jet::variable: index out of range");
  Jet j = zero(sp);
  const double base = sp->base_point()[static_cast<size_t>(var)];
  if (base != 0.0) j.coeffs_[MultiIndex(sp->vars())] = base;
  if (j.order_ >= 1) j.coeffs_[MultiIndex::unit(sp->vars(), var)] = 1.0;
  return j;
}

Complex Jet::coeff(const MultiIndex& m) const {
  auto it = coeffs_.find(m);
  return it == coeffs_.end() ? Complex(0.0, 0.0) : it->second;
}

Complex Jet::value() const {
  if (!valid()) return 0.0;
  return coeff(MultiIndex(space_->vars()));
}

void Jet::set_coeff(const MultiIndex& m, Complex v) {
  if (m.degree() > order_) throw UsageError("Jet::set_coeff: degree exceeds trustworthy order");
  if (v == Complex(0.0, 0.0))
    coeffs_.erase(m);
  else
    coeffs_[m] = v;
}

Jet Jet::truncated(int k) const {
  Jet r = *this;
  r.order_ = std::min(order_, k);
  for (auto it = r.coeffs_.begin(); it != r.coeffs_.end();) {
    if (it->first.degree() > r.order_)
      it = r.coeffs_.erase(it);
    else
      ++it;
  }
  return r;
}

Complex Jet::evaluate(std::span<const double> delta) const {
  Complex acc = 0.0;
  for (const auto& [m, c] : coeffs_) {
    double mono = 1.0;
    for (int v = 0; v < m.nvars(); ++v)
      for (int e = 0; e < m[v]; ++e) mono *= delta[static_cast<size_t>(v)];
    acc += c * mono;
  }
  return acc;
}

double Jet::max_abs(int through_order) const {
  double mx = 0.0;
  for (const auto& [m, c] : coeffs_) {
    if (m.degree() > through_order) break;  // graded map order
    mx = std::max(mx, std::abs(c));
  }
  return mx;
}

Jet operator+(const Jet& a, const Jet& b) {
  require_compatible(a, b);
  Jet r = Jet::zero(a.space_, std::min(a.order_, b.order_));
  r.coeffs_ = a.coeffs_;
  for (const auto& [m, c] : b.coeffs_) {
    auto [it, inserted] = r.coeffs_.try_emplace(m, c);
    if (!inserted) it->second += c;
  }
  for (auto it = r.coeffs_.begin(); it != r.coeffs_.end();) {
    if (it->first.degree() > r.order_ || it->second == Complex(0.0, 0.0))
      it = r.coeffs_.erase(it);
    else
      ++it;
  }
  return r;
}

Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }

Jet operator-(const Jet& a) {
  Jet r = a;
  for (auto& [m, c] : r.coeffs_) c = -c;
  return r;
}

Jet operator*(Complex s, const Jet& a) {
  if (s == Complex(0.0, 0.0)) return Jet::zero(a.space_, a.order_);
  Jet r = a;
  for (auto& [m, c] : r.coeffs_) c *= s;
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  require_compatible(a, b);
  const JetSpace& sp = *a.space_;
  const int kout = std::min(a.order_, b.order_);
  Jet r = Jet::zero(a.space_, kout);
  if (kout < 0 || a.coeffs_.empty() || b.coeffs_.empty()) return r;

  const int m_all = static_cast<int>(sp.monomials().size());
  std::vector<Complex> da(static_cast<size_t>(m_all), Complex(0.0, 0.0));
  std::vector<Complex> db(static_cast<size_t>(m_all), Complex(0.0, 0.0));
  for (const auto& [m, c] : a.coeffs_) da[static_cast<size_t>(sp.index_of(m))] = c;
  for (const auto& [m, c] : b.coeffs_) db[static_cast<size_t>(sp.index_of(m))] = c;

  const int m_out = sp.count_through(kout);
  std::vector<Complex> out(static_cast<size_t>(m_out));
  const bool par = sp.pair_count_through(kout) > kParallelPairThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (int t = 0; t < m_out; ++t) {
    Complex acc(0.0, 0.0);
    for (const auto& p : sp.pairs_for(t)) acc += da[static_cast<size_t>(p.a)] * db[static_cast<size_t>(p.b)];
    out[static_cast<size_t>(t)] = acc;
  }
  for (int t = 0; t < m_out; ++t)
    if (out[static_cast<size_t>(t)] != Complex(0.0, 0.0)) r.coeffs_[sp.monomials()[static_cast<size_t>(t)]] = out[static_cast<size_t>(t)];
  return r;
}

Jet mul_reference(const Jet& a, const Jet& b) {
  require_compatible(a, b);
  const int kout = std::min(a.order_, b.order_);
  Jet r = Jet::zero(a.space_, kout);
  for (const auto& [ma, ca] : a.coeffs_) {
    if (ma.degree() > kout) break;
    for (const auto& [mb, cb] : b.coeffs_) {
      if (ma.degree() + mb.degree() > kout) break;
      const MultiIndex m = ma.plus(mb);
      auto [it, inserted] = r.coeffs_.try_emplace(m, ca * cb);
      if (!inserted) it->second += ca * cb;
    }
  }
  for (auto it = r.coeffs_.begin(); it != r.coeffs_.end();) {
    if (it->second == Complex(0.0, 0.0))
      it = r.coeffs_.erase(it);
    else
      ++it;
  }
  return r;
}

Jet reciprocal(const Jet& a) {
  if (!a.valid() || a.order_ < 0) throw OrderExhaustedError("reciprocal: input has no trustworthy order");
  const Complex c0 = a.value();
  if (std::abs(c0) == 0.0) throw SingularInputError("reciprocal: zero constant term");
  const JetSpace& sp = *a.space_;
  const int k = a.order_;
  const int m_out = sp.count_through(k);
  std::vector<Complex> da(sp.monomials().size(), Complex(0.0, 0.0));
  for (const auto& [m, c] : a.coeffs_) da[static_cast<size_t>(sp.index_of(m))] = c;
  std::vector<Complex> rr(static_cast<size_t>(m_out), Complex(0.0, 0.0));
  rr[0] = 1.0 / c0;
  // graded recurrence: a0 r_t = -sum_{i != 0} a_i r_{t-i}
  for (int t = 1; t < m_out; ++t) {
    Complex acc(0.0, 0.0);
    for (const auto& p : sp.pairs_for(t))
      if (p.a != 0) acc += da[static_cast<size_t>(p.a)] * rr[static_cast<size_t>(p.b)];
    rr[static_cast<size_t>(t)] = -rr[0] * acc;
  }
  Jet res = Jet::zero(a.space_, k);
  for (int t = 0; t < m_out; ++t)
    if (rr[static_cast<size_t>(t)] != Complex(0.0, 0.0)) res.coeffs_[sp.monomials()[static_cast<size_t>(t)]] = rr[static_cast<size_t>(t)];
  return res;
}

Jet sqrt(const Jet& a) {
  if (!a.valid() || a.order_ < 0) throw OrderExhaustedError("sqrt: input has no trustworthy order");
  const Complex c0 = a.value();
  if (!(c0.real() > 0.0) || std::abs(c0.imag()) > 1e-10 * c0.real())
    throw SingularInputError("sqrt: constant term must be positive");
  const JetSpace& sp = *a.space_;
  const int k = a.order_;
  const int m_out = sp.count_through(k);
  std::vector<Complex> da(sp.monomials().size(), Complex(0.0, 0.0));
  for (const auto& [m, c] : a.coeffs_) da[static_cast<size_t>(sp.index_of(m))] = c;
  std::vector<Complex> ss(static_cast<size_t>(m_out), Complex(0.0, 0.0));
  ss[0] = std::sqrt(c0);
  const Complex inv2s0 = 1.0 / (2.0 * ss[0]);
  // graded recurrence: s_t = (a_t - sum_{i,j != 0} s_i s_j) / (2 s_0)
  for (int t = 1; t < m_out; ++t) {
    Complex acc(0.0, 0.0);
    for (const auto& p : sp.pairs_for(t))
      if (p.a != 0 && p.b != 0) acc += ss[static_cast<size_t>(p.a)] * ss[static_cast<size_t>(p.b)];
    ss[static_cast<size_t>(t)] = (da[static_cast<size_t>(t)] - acc) * inv2s0;
  }
  Jet res = Jet::zero(a.space_, k);
  for (int t = 0; t < m_out; ++t)
    if (ss[static_cast<size_t>(t)] != Complex(0.0, 0.0)) res.coeffs_[sp.monomials()[static_cast<size_t>(t)]] = ss[static_cast<size_t>(t)];
  return res;
}

Jet partial(const Jet& a, int var) {
  if (!a.valid()) throw UsageError("partial: empty jet");
  if (var < 0 || var >= a.space_->vars()) throw UsageError("partial: variable out of range");
  Jet r = Jet::zero(a.space_, a.order_ - 1);
  if (r.order_ < 0) return r;
  for (const auto& [m, c] : a.coeffs_) {
    if (m[var] == 0) continue;
    if (m.degree() - 1 > r.order_) continue;
    r.coeffs_[m.lowered(var)] += c * double(m[var]);
  }
  for (auto it = r.coeffs_.begin(); it != r.coeffs_.end();) {
    if (it->second == Complex(0.0, 0.0))
      it = r.coeffs_.erase(it);
    else
      ++it;
  }
  return r;
}

Jet promote(const Jet& a, std::shared_ptr<const JetSpace> target) {
  if (!a.valid()) throw UsageError("promote: empty jet");
  const JetSpace& src = *a.space();
  const JetSpace& dst = *target;
  if (dst.num_x() != src.num_x() || dst.num_xi() < src.num_xi())
    throw IncompatibleJetsError("promote: target space must extend the source layout");
  for (int v = 0; v < src.vars(); ++v)
    if (src.base_point()[static_cast<size_t>(v)] != dst.base_point()[static_cast<size_t>(v)])
      throw IncompatibleJetsError("promote: base points disagree on shared variables");
  Jet r = Jet::zero(std::move(target), std::min(a.order(), dst.max_order()));
  for (const auto& [m, c] : a.terms()) {
    if (m.degree() > r.order()) continue;
    MultiIndex mm(dst.vars());
    for (int v = 0; v < src.vars(); ++v) mm.set(v, m[v]);
    r.set_coeff(mm, c);
  }
  return r;
}

Jet restrict_to_vars(const Jet& a, std::shared_ptr<const JetSpace> target,
                     std::span<const int> kept_source_vars) {
  if (!a.valid()) throw UsageError("restrict_to_vars: empty jet");
  const JetSpace& dst = *target;
  if (static_cast<int>(kept_source_vars.size()) != dst.vars())
    throw IncompatibleJetsError("restrict_to_vars: variable map does not match the target space");
  Jet r = Jet::zero(std::move(target), std::min(a.order(), dst.max_order()));
  if (r.order() < 0) return r;
  for (const auto& [m, c] : a.terms()) {
    MultiIndex mm(dst.vars());
    bool keep = true;
    int kept_degree = 0;
    for (int v = 0; v < dst.vars(); ++v) {
      mm.set(v, m[kept_source_vars[static_cast<size_t>(v)]]);
      kept_degree += m[kept_source_vars[static_cast<size_t>(v)]];
    }
    if (kept_degree != m.degree()) keep = false;  // a dropped variable has nonzero exponent
    if (keep && mm.degree() <= r.order()) r.set_coeff(mm, r.coeff(mm) + c);
  }
  return r;
}

double max_abs_diff(const Jet& a, const Jet& b, int through_order) {
  require_compatible(a, b);
  double mx = 0.0;
  const int k = std::min({through_order, a.order(), b.order()});
  for (const auto& [m, c] : a.terms()) {
    if (m.degree() > k) break;
    mx = std::max(mx, std::abs(c - b.coeff(m)));
  }
  for (const auto& [m, c] : b.terms()) {
    if (m.degree() > k) break;
    mx = std::max(mx, std::abs(c - a.coeff(m)));
  }
  return mx;
}

}  // namespace stokesdtn
