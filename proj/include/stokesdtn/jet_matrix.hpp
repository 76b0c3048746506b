#pragma once

#include <vector>

#include "stokesdtn/jet.hpp"

namespace stokesdtn {

// Dense matrix of Jets. Small (n or n+1 square) throughout the engine.
class JetMatrix {
 public:
  JetMatrix() = default;
  JetMatrix(std::shared_ptr<const JetSpace> sp, int rows, int cols, int order = -2)
      : rows_(rows), cols_(cols), e_(static_cast<size_t>(rows) * static_cast<size_t>(cols), Jet::zero(sp, order)) {}

  static JetMatrix identity(std::shared_ptr<const JetSpace> sp, int dim, int order = -2) {
    JetMatrix m(sp, dim, dim, order);
    for (int i = 0; i < dim; ++i) m.at(i, i) = Jet::constant(sp, 1.0, order);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Jet& at(int r, int c) { return e_[static_cast<size_t>(r) * static_cast<size_t>(cols_) + static_cast<size_t>(c)]; }
  const Jet& at(int r, int c) const { return e_[static_cast<size_t>(r) * static_cast<size_t>(cols_) + static_cast<size_t>(c)]; }

  Jet trace() const;
  int min_order() const;
  double max_abs(int through_order = MultiIndex::kMaxVars * 255) const;
  JetMatrix partial(int var) const;
  JetMatrix transposed() const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Jet> e_;
};

JetMatrix operator+(const JetMatrix& a, const JetMatrix& b);
JetMatrix operator-(const JetMatrix& a, const JetMatrix& b);
JetMatrix operator*(const JetMatrix& a, const JetMatrix& b);
JetMatrix operator*(const Jet& s, const JetMatrix& a);
JetMatrix operator*(Complex s, const JetMatrix& a);
std::vector<Jet> operator*(const JetMatrix& a, const std::vector<Jet>& v);

// Inverse through the matrix's trustworthy order via Newton iteration
// X <- X(2I - GX), seeded with the numeric inverse of the base-point values.
JetMatrix inverse(const JetMatrix& g);

double max_abs_diff(const JetMatrix& a, const JetMatrix& b, int through_order);

}  // namespace stokesdtn
