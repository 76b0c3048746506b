#pragma once

#include <complex>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "stokesdtn/multi_index.hpp"

namespace stokesdtn {

using Complex = std::complex<double>;

// The ambient algebra of one scenario: variables (x_1..x_nx, xi_1..xi_nxi),
// a base point, and the monomial tables shared by every Jet living in it.
// Geometry runs with nxi = 0; symbol computations use the joint space with
// the sampled covector direction as the xi base point.
class JetSpace {
 public:
  static std::shared_ptr<const JetSpace> make(int num_x, int num_xi, int max_order,
                                              std::vector<double> base_point);

  int num_x() const { return num_x_; }
  int num_xi() const { return num_xi_; }
  int vars() const { return num_x_ + num_xi_; }
  int max_order() const { return max_order_; }
  const std::vector<double>& base_point() const { return base_; }

  int var_x(int i) const { return i; }
  int var_xi(int a) const { return num_x_ + a; }
  int var_normal() const { return num_x_ - 1; }

  // Monomials of total degree <= max_order in graded-lex order.
  const std::vector<MultiIndex>& monomials() const { return monomials_; }
  // Number of monomials of degree <= k.
  int count_through(int k) const;
  int index_of(const MultiIndex& m) const;  // -1 if degree > max_order

  struct Pair {
    int32_t a, b;
  };
  // Input index pairs whose monomials multiply to output monomial t.
  std::span<const Pair> pairs_for(int t) const {
    return {pairs_.data() + pair_begin_[static_cast<size_t>(t)],
            pairs_.data() + pair_begin_[static_cast<size_t>(t) + 1]};
  }
  size_t pair_count_through(int order) const {
    return static_cast<size_t>(pair_begin_[static_cast<size_t>(count_through(order))]);
  }

  bool same_layout(const JetSpace& o) const;

 private:
  JetSpace(int num_x, int num_xi, int max_order, std::vector<double> base);

  int num_x_, num_xi_, max_order_;
  std::vector<double> base_;
  std::vector<MultiIndex> monomials_;
  std::map<MultiIndex, int> index_;
  std::vector<int> degree_offset_;  // degree_offset_[d] = first index of degree d
  std::vector<Pair> pairs_;
  std::vector<int64_t> pair_begin_;
};

// Truncated Taylor expansion around the space's base point. Immutable value
// type; `order` is the trustworthy truncation order (all coefficients of
// total degree <= order are exact, everything beyond is unknown and not
// stored). order = -1 means nothing trustworthy.
class Jet {
 public:
  Jet() = default;

  static Jet zero(std::shared_ptr<const JetSpace> sp, int order = -2);
  static Jet constant(std::shared_ptr<const JetSpace> sp, Complex v, int order = -2);
  // The coordinate function of variable `var`: base value plus unit monomial.
  static Jet variable(std::shared_ptr<const JetSpace> sp, int var);

  bool valid() const { return space_ != nullptr; }
  const std::shared_ptr<const JetSpace>& space() const { return space_; }
  int order() const { return order_; }

  Complex coeff(const MultiIndex& m) const;
  Complex value() const;  // constant coefficient
  void set_coeff(const MultiIndex& m, Complex v);
  const std::map<MultiIndex, Complex>& terms() const { return coeffs_; }

  // Same coefficients, trustworthy order lowered (never raised) to k.
  Jet truncated(int k) const;

  Complex evaluate(std::span<const double> delta) const;
  double max_abs(int through_order = MultiIndex::kMaxVars * 255) const;
  bool is_strictly_zero() const { return coeffs_.empty(); }

 private:
  friend Jet operator+(const Jet&, const Jet&);
  friend Jet operator-(const Jet&, const Jet&);
  friend Jet operator-(const Jet&);
  friend Jet operator*(const Jet&, const Jet&);
  friend Jet operator*(Complex, const Jet&);
  friend Jet mul_reference(const Jet&, const Jet&);
  friend Jet reciprocal(const Jet&);
  friend Jet sqrt(const Jet&);
  friend Jet partial(const Jet&, int);

  std::shared_ptr<const JetSpace> space_;
  int order_ = -1;
  std::map<MultiIndex, Complex> coeffs_;
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
// Truncated Cauchy product. Dense gather kernel over the space's pair table;
// parallelized with OpenMP above a work threshold. Deterministic for any
// thread count (each output coefficient is a serial sum in table order).
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(Complex s, const Jet& a);
inline Jet operator*(const Jet& a, Complex s) { return s * a; }
inline Jet operator*(double s, const Jet& a) { return Complex(s, 0.0) * a; }
inline Jet operator*(const Jet& a, double s) { return Complex(s, 0.0) * a; }

// Serial reference kernel (naive sparse map convolution). Kept as the
// independent check of the gather kernel; also used by tools/bench_jets.
Jet mul_reference(const Jet& a, const Jet& b);

// Graded recurrences; exact through the input's trustworthy order.
Jet reciprocal(const Jet& a);  // requires nonzero constant term
Jet sqrt(const Jet& a);        // requires positive real constant term

// Formal partial derivative; result order drops by one.
Jet partial(const Jet& a, int var);

// Embed a jet from an x-only space into a joint (x, xi) space with the same
// x layout and base; xi exponents are zero (geometry is inert in xi).
Jet promote(const Jet& a, std::shared_ptr<const JetSpace> target);

// Restriction to a subset of variables: every dropped variable is evaluated
// at its base point (terms with nonzero dropped exponents vanish).
Jet restrict_to_vars(const Jet& a, std::shared_ptr<const JetSpace> target,
                     std::span<const int> kept_source_vars);

double max_abs_diff(const Jet& a, const Jet& b, int through_order);

void require_compatible(const Jet& a, const Jet& b);

}  // namespace stokesdtn
