#pragma once

#include <map>
#include <string>
#include <vector>

#include "stokesdtn/geometry.hpp"

namespace stokesdtn {

// Finite sum of coeff(x) * d^beta over x-variables, order <= 2. The system
// matrices below only ever use tangential derivative indices; keeping the
// descriptor generic keeps apply and symbolization decoupled.
struct DiffOp {
  std::shared_ptr<const JetSpace> space;
  std::map<MultiIndex, Jet> terms;  // derivative multi-index -> coefficient jet

  void add(const MultiIndex& beta, const Jet& coeff);
  Jet apply(const Jet& f) const;
  bool is_zero() const { return terms.empty(); }
};

struct OpMatrix {
  int dim = 0;
  std::vector<DiffOp> ops;

  OpMatrix() = default;
  OpMatrix(std::shared_ptr<const JetSpace> sp, int d);
  DiffOp& at(int r, int c) { return ops[static_cast<size_t>(r) * static_cast<size_t>(dim) + static_cast<size_t>(c)]; }
  const DiffOp& at(int r, int c) const { return ops[static_cast<size_t>(r) * static_cast<size_t>(dim) + static_cast<size_t>(c)]; }
  std::vector<Jet> apply(const std::vector<Jet>& u) const;
};

// The transformed second-order system in boundary normal coordinates,
// written as A (I d_n^2 + B d_n + C2 + C1 + C0). A and B are multiplication
// matrices (order-0 descriptors); C2 is the pure tangential second-order
// block, C1 first order, C0 zero order.
struct SystemMatrices {
  int n = 0;
  std::shared_ptr<const JetSpace> space;
  OpMatrix a, b, c2, c1, c0;
};

SystemMatrices assemble(const BoundaryNormalMetric& m);
SystemMatrices assemble(const MetricData& md);

// A (U'' + B U' + C U) for U = (w, f), primes being normal derivatives.
std::vector<Jet> apply_system(const SystemMatrices& mats, const std::vector<Jet>& w, const Jet& f);

struct FluidState {
  std::vector<Jet> w;
  Jet f;
  std::vector<Jet> u;  // velocity reconstructed from (w, f)
  Jet p;               // pressure reconstructed from (w, f)
};

FluidState transform(const MetricData& md, const std::vector<Jet>& w, const Jet& f);
FluidState transform(const BoundaryNormalMetric& m, const std::vector<Jet>& w, const Jet& f);

// Strain with mixed indices, (Su)^j_k = grad^j u_k + nabla_k u^j.
JetMatrix strain_mixed(const MetricData& md, const std::vector<Jet>& u);
// Fully raised variant (Su)^{jk}.
JetMatrix strain_upper(const MetricData& md, const std::vector<Jet>& u);
// sigma^{jk} = mu (Su)^{jk} - p g^{jk}.
JetMatrix stress_upper(const MetricData& md, const std::vector<Jet>& u, const Jet& p);
// (div sigma)^j = nabla_k sigma^{jk}.
std::vector<Jet> div_stress(const MetricData& md, const std::vector<Jet>& u, const Jet& p);
std::vector<Jet> div_stress(const BoundaryNormalMetric& m, const std::vector<Jet>& u, const Jet& p);

struct TransformCheck {
  double abs_residual = 0.0;
  double rel_residual = 0.0;
  double scale = 0.0;
  int compared_order = -1;
};

// The certifying oracle of the whole assembly: apply_system must reproduce
// (div sigma(u,p), div u) built from raw covariant derivatives, with
// (u,p) = transform(w,f), coefficientwise through the trustworthy order.
TransformCheck verify_transformation(const MetricData& md, const std::vector<Jet>& w, const Jet& f);
TransformCheck verify_transformation(const MetricData& md, const SystemMatrices& mats,
                                     const std::vector<Jet>& w, const Jet& f);
TransformCheck verify_transformation(const BoundaryNormalMetric& m, const std::vector<Jet>& w, const Jet& f);

// Fault injection for mutation-sensitivity checks: adds `amount` to one
// entry of B/C0 (constant coefficient) or C1 (coefficient of the first
// tangential derivative). Entry format "B:1,2" / "C0:0,0" / "C1:2,1".
void mutate_entry(SystemMatrices* mats, const std::string& entry_spec, double amount = 1e-3);

}  // namespace stokesdtn
