#pragma once

#include <vector>

#include "stokesdtn/jet_matrix.hpp"

namespace stokesdtn {

// Metric near a boundary point in normal coordinates: the inverse metric is
// block diagonal with tangential block g^{ab} (a,b < n-1 zero-based) and a
// unit normal-normal entry, the mixed entries vanish identically. The
// viscosity jet rides along since every consumer needs both.
struct BoundaryNormalMetric {
  int n = 0;                                // manifold dimension
  std::shared_ptr<const JetSpace> space;    // x-only space (num_xi = 0)
  JetMatrix g_upper;                        // n x n inverse metric jets
  Jet mu;

  // Assembles the full matrix from a tangential (n-1)x(n-1) block and checks
  // every invariant (normal form, symmetry, SPD base values, mu(0) > 0).
  static BoundaryNormalMetric make(std::shared_ptr<const JetSpace> space,
                                   const JetMatrix& tangential_upper, Jet mu);
  void validate() const;
};

struct ChristoffelJets {
  int n = 0;
  std::vector<Jet> g;  // n^3 entries, symmetric in the lower pair
  Jet& at(int j, int k, int l) { return g[(static_cast<size_t>(j) * static_cast<size_t>(n) + static_cast<size_t>(k)) * static_cast<size_t>(n) + static_cast<size_t>(l)]; }
  const Jet& at(int j, int k, int l) const { return g[(static_cast<size_t>(j) * static_cast<size_t>(n) + static_cast<size_t>(k)) * static_cast<size_t>(n) + static_cast<size_t>(l)]; }
};

struct RicciJets {
  JetMatrix lower;  // R_kl
  JetMatrix upper;  // R^jk = g^jl g^km R_lm
};

JetMatrix lower_metric(const BoundaryNormalMetric& m);
ChristoffelJets christoffel(const BoundaryNormalMetric& m, const JetMatrix& g_lower);
RicciJets ricci(const BoundaryNormalMetric& m, const ChristoffelJets& gamma);

// Everything downstream needs the same derived tensors; build them once.
struct MetricData {
  BoundaryNormalMetric metric;
  JetMatrix g_lower;
  ChristoffelJets gamma;
  RicciJets ric;

  static MetricData build(const BoundaryNormalMetric& m);
};

std::vector<Jet> gradient(const MetricData& md, const Jet& f);    // (grad f)^j
Jet laplace_beltrami(const MetricData& md, const Jet& f);
Jet divergence(const MetricData& md, const std::vector<Jet>& w);
// Hessian with the first index raised.
JetMatrix scalar_hessian(const MetricData& md, const Jet& f);
// T^j_k = nabla_k w^j (row j, column k).
JetMatrix covariant_derivative_vector(const MetricData& md, const std::vector<Jet>& w);

// Convenience overloads matching the plain operation contracts.
Jet laplace_beltrami(const BoundaryNormalMetric& m, const Jet& f);
Jet divergence(const BoundaryNormalMetric& m, const std::vector<Jet>& w);
JetMatrix scalar_hessian(const BoundaryNormalMetric& m, const Jet& f);
JetMatrix covariant_derivative_vector(const BoundaryNormalMetric& m, const std::vector<Jet>& w);

}  // namespace stokesdtn
