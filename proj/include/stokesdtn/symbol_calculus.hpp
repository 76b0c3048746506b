#pragma once

#include <vector>

#include "stokesdtn/stokes_system.hpp"

namespace stokesdtn {

// Matrix of jets in the joint (x, xi') space, positively homogeneous of
// `degree` in xi'. Trustworthy orders live on the jets themselves.
struct SymbolMatrix {
  JetMatrix entries;
  int degree = 0;
  int min_order() const { return entries.min_order(); }
};

// Symbols of the first-order system data: b = B, c = c2 + c1 + c0 with
// tangential derivatives replaced by i*xi.
struct SymbolizedSystem {
  int n = 0;
  std::shared_ptr<const JetSpace> space;  // joint space, xi base = direction
  std::vector<double> direction;
  SymbolMatrix b, c2, c1, c0;
};

// q1, q0, ..., q_{1-depth}; q(degree) indexes by homogeneity degree.
struct SymbolSequence {
  int n = 0;
  std::shared_ptr<const JetSpace> space;
  std::vector<double> direction;
  int depth = 0;
  std::vector<SymbolMatrix> symbols;  // symbols[i] has degree 1 - i

  const SymbolMatrix& q(int degree) const;
  SymbolMatrix& q(int degree);
};

std::shared_ptr<const JetSpace> joint_space(const std::shared_ptr<const JetSpace>& x_space,
                                            const std::vector<double>& direction);

// Tangential derivative indices map to i*xi; multiplication parts promote.
SymbolizedSystem symbolize(const SystemMatrices& mats, const std::vector<double>& direction);

// q1 = sqrt(-c2 scalar) * I, the positive square root of the cotangent norm.
SymbolMatrix principal_symbol(const SymbolizedSystem& sys);
Jet cotangent_norm(const SymbolizedSystem& sys);  // |xi'| as a jet

// One contribution of the degree-d grouping of the full symbol equation.
struct RhsTerm {
  int j = 0, k = 0;          // symbol degrees of the two factors
  MultiIndex derivative;     // multi-index over the tangential slots
  Complex scale;             // (-i)^|J| / J!
};
std::vector<RhsTerm> rhs_contributions(int d, int lowest_degree, int num_tangential);

// Right-hand side of 2|xi'| q_{d-1} = rhs(d): the generic grouping of the
// degree-d homogeneous part of the full symbol equation. `have` must hold
// q1 ... q_d.
SymbolMatrix symbol_rhs(int d, const SymbolSequence& have, const SymbolizedSystem& sys);
// The two explicitly displayed low-step groupings, kept as independent
// transcriptions; tests assert they agree with symbol_rhs.
SymbolMatrix symbol_rhs_deg1_direct(const SymbolSequence& have, const SymbolizedSystem& sys);
SymbolMatrix symbol_rhs_deg0_direct(const SymbolSequence& have, const SymbolizedSystem& sys);

// Solve q1 q + q q1 = rhs for q (q1 is a scalar matrix): q = rhs / (2|xi'|).
SymbolMatrix next_symbol(const SymbolMatrix& rhs, const SymbolMatrix& q1);

SymbolSequence compute_symbol_sequence(const SystemMatrices& mats, const std::vector<double>& direction,
                                       int depth);
SymbolSequence compute_symbol_sequence(const BoundaryNormalMetric& m, const std::vector<double>& direction,
                                       int depth);

struct DegreeResidual {
  int degree = 0;
  double abs_norm = 0.0;
  double rel_norm = 0.0;
  double scale = 0.0;
  int order = -1;  // trustworthy order the norm was taken through
};

// Per-degree residual of the full symbol equation, degrees 2 down to
// 2 - depth (the lowest checkable degree needs the next symbol as border
// term, so run the recursion one step deeper than the degree range wanted).
std::vector<DegreeResidual> full_symbol_residual(const SymbolSequence& seq, const SymbolizedSystem& sys);

// Max over entries of |sum_a xi_a d_{xi_a} q - degree * q| / max(|q|, 1),
// through the differentiated order.
double euler_residual(const SymbolMatrix& s, const std::shared_ptr<const JetSpace>& sp);
double euler_residual(const Jet& j, int degree);

}  // namespace stokesdtn
