#pragma once

#include <optional>
#include <vector>

#include "stokesdtn/symbol_calculus.hpp"

namespace stokesdtn {

// Everything a recovery run consumes; also the payload of the symbol dump
// file written by `forward`. The viscosity is known input to recovery.
struct ForwardData {
  int n = 0;
  int jet_order = 0;
  int depth = 0;
  std::shared_ptr<const JetSpace> x_space;
  Jet mu;
  struct DirectionData {
    std::vector<double> xi;
    SymbolSequence seq;
  };
  std::vector<DirectionData> directions;
};

// Per-direction symbol-derived values, homogeneous of expected_degree in
// xi'; values are joint-space jets (the boundary/tangential slice is taken
// inside the fit, the homogeneity check runs on the full jets).
struct QuadraticFormSample {
  std::vector<std::vector<double>> directions;
  std::vector<Jet> values;
  int expected_degree = 2;
};

struct FitDiagnostics {
  double fit_residual = 0.0;   // max |design * k - value| over directions
  double homogeneity = 0.0;    // max Euler residual of the input values
  double max_imag = 0.0;
  int trust_order = -1;
};

// Least-squares fit of a symmetric tangential tensor k^{ab} with
// k^{ab} xi_a xi_b reproducing the sampled values; returns tangential jets.
JetMatrix extract_quadratic_form(const QuadraticFormSample& sample,
                                 const std::shared_ptr<const JetSpace>& tangential_space,
                                 FitDiagnostics* diag = nullptr);

// Metric whose boundary jets match the recovered normal derivatives
// 0..r-1 (r = recovered.size()) and whose higher normal derivatives vanish.
BoundaryNormalMetric reference_extension(const std::vector<JetMatrix>& recovered_orders, const Jet& mu,
                                         const std::shared_ptr<const JetSpace>& x_space);

// Pure algebra of the closed-form trace inversion: h = k:g_lower / denom,
// tensor = (coef * h * g0 - k) / (n+1), with (coef, denom) = (n+3, n^2+n-4)
// at first order and (n+5, n^2+3n-6) beyond.
JetMatrix trace_form_inversion(const JetMatrix& k, const JetMatrix& g0, const JetMatrix& g0_lower, int n,
                               int r, Jet* h_out = nullptr);

struct OrderResult {
  int r = 0;
  JetMatrix tensor;  // tangential jets of the r-th normal derivative of g^{ab}
  int trust_order = -1;
  // diagnostics
  double fit_residual = 0.0;
  double asymmetry = 0.0;       // before symmetrization
  double max_imag = 0.0;        // before the real part is taken
  double euler = 0.0;           // homogeneity of the differences used
  double response_condition = 0.0;  // smallest pivot of the response normal matrix
  // closed-form trace diagnostic (reported for every order, load-bearing at r <= 1)
  Complex h_base = 0.0;
  std::vector<Complex> k_base;  // fitted trace-form tensor at the base point, row-major
};

struct RecoveryReport {
  int n = 0, depth = 0, jet_order = 0;
  // constants (forced by n; reported and used by the trace-form inversion)
  int order1_metric_coefficient = 0;      // n+3
  int order1_contraction_denominator = 0; // n^2+n-4
  int higher_metric_coefficient = 0;      // n+5
  int higher_contraction_denominator = 0; // n^2+3n-6
  int inversion_denominator = 0;          // n+1
  std::vector<OrderResult> orders;
};

struct TruthComparison {
  struct PerOrder {
    int r = 0;
    double abs_err = 0.0;
    double rel_err = 0.0;
    int compared_order = -1;
  };
  std::vector<PerOrder> orders;
  double max_rel_err = 0.0;
};

// Tangential jets of the r-th normal derivative of the true inverse metric,
// for round-trip comparisons.
JetMatrix truth_normal_derivative(const BoundaryNormalMetric& truth, int r,
                                  const std::shared_ptr<const JetSpace>& tangential_space);

RecoveryReport run_recovery(const ForwardData& fd, int depth);
TruthComparison compare_to_truth(const RecoveryReport& report, const BoundaryNormalMetric& truth);

}  // namespace stokesdtn
