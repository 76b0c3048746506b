#include "stokesdtn/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stokesdtn {

namespace {

struct SmallLinearSolver {
  // normal-equation solver for least squares with a fixed design matrix
  int rows = 0, cols = 0;
  std::vector<double> design;      // rows x cols
  std::vector<double> normal_inv;  // cols x cols
  double min_pivot = 0.0;

  SmallLinearSolver(std::vector<double> m, int r, int c) : rows(r), cols(c), design(std::move(m)) {
    std::vector<double> g(static_cast<size_t>(c) * static_cast<size_t>(c), 0.0);
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < c; ++j) {
        double acc = 0.0;
        for (int k = 0; k < r; ++k)
          acc += design[static_cast<size_t>(k) * static_cast<size_t>(c) + static_cast<size_t>(i)] *
                 design[static_cast<size_t>(k) * static_cast<size_t>(c) + static_cast<size_t>(j)];
        g[static_cast<size_t>(i) * static_cast<size_t>(c) + static_cast<size_t>(j)] = acc;
      }
    // Gauss-Jordan with pivot tracking; the smallest pivot is the rank guard.
    normal_inv.assign(static_cast<size_t>(c) * static_cast<size_t>(c), 0.0);
    for (int i = 0; i < c; ++i) normal_inv[static_cast<size_t>(i) * static_cast<size_t>(c) + static_cast<size_t>(i)] = 1.0;
    min_pivot = std::numeric_limits<double>::infinity();
    for (int col = 0; col < c; ++col) {
      int piv = col;
      for (int rr = col + 1; rr < c; ++rr)
        if (std::abs(g[static_cast<size_t>(rr) * static_cast<size_t>(c) + static_cast<size_t>(col)]) >
            std::abs(g[static_cast<size_t>(piv) * static_cast<size_t>(c) + static_cast<size_t>(col)]))
          piv = rr;
      const double p = g[static_cast<size_t>(piv) * static_cast<size_t>(c) + static_cast<size_t>(col)];
      min_pivot = std::min(min_pivot, std::abs(p));
      if (std::abs(p) < 1e-12)
        throw RankDeficiencyError("direction set does not determine the symmetric tensor (rank deficiency)");
      if (piv != col)
        for (int cc = 0; cc < c; ++cc) {
          std::swap(g[static_cast<size_t>(piv) * static_cast<size_t>(c) + static_cast<size_t>(cc)], g[static_cast<size_t>(col) * static_cast<size_t>(c) + static_cast<size_t>(cc)]);
          std::swap(normal_inv[static_cast<size_t>(piv) * static_cast<size_t>(c) + static_cast<size_t>(cc)], normal_inv[static_cast<size_t>(col) * static_cast<size_t>(c) + static_cast<size_t>(cc)]);
        }
      for (int cc = 0; cc < c; ++cc) {
        g[static_cast<size_t>(col) * static_cast<size_t>(c) + static_cast<size_t>(cc)] /= p;
        normal_inv[static_cast<size_t>(col) * static_cast<size_t>(c) + static_cast<size_t>(cc)] /= p;
      }
      for (int rr = 0; rr < c; ++rr) {
        if (rr == col) continue;
        const double f = g[static_cast<size_t>(rr) * static_cast<size_t>(c) + static_cast<size_t>(col)];
        if (f == 0.0) continue;
        for (int cc = 0; cc < c; ++cc) {
          g[static_cast<size_t>(rr) * static_cast<size_t>(c) + static_cast<size_t>(cc)] -= f * g[static_cast<size_t>(col) * static_cast<size_t>(c) + static_cast<size_t>(cc)];
          normal_inv[static_cast<size_t>(rr) * static_cast<size_t>(c) + static_cast<size_t>(cc)] -= f * normal_inv[static_cast<size_t>(col) * static_cast<size_t>(c) + static_cast<size_t>(cc)];
        }
      }
    }
  }

  std::vector<double> solve(std::span<const double> y) const {
    std::vector<double> aty(static_cast<size_t>(cols), 0.0);
    for (int j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (int k = 0; k < rows; ++k) acc += design[static_cast<size_t>(k) * static_cast<size_t>(cols) + static_cast<size_t>(j)] * y[static_cast<size_t>(k)];
      aty[static_cast<size_t>(j)] = acc;
    }
    std::vector<double> x(static_cast<size_t>(cols), 0.0);
    for (int i = 0; i < cols; ++i) {
      double acc = 0.0;
      for (int j = 0; j < cols; ++j) acc += normal_inv[static_cast<size_t>(i) * static_cast<size_t>(cols) + static_cast<size_t>(j)] * aty[static_cast<size_t>(j)];
      x[static_cast<size_t>(i)] = acc;
    }
    return x;
  }
};

std::vector<int> tangential_vars(int n) {
  std::vector<int> v(static_cast<size_t>(n - 1));
  for (int i = 0; i < n - 1; ++i) v[static_cast<size_t>(i)] = i;
  return v;
}

// Evaluate the dropped variables at their base point: xi at the sampled
// direction, x_n at the boundary.
Jet boundary_slice(const Jet& full, const std::shared_ptr<const JetSpace>& tang) {
  const auto vars = tangential_vars(full.space()->num_x());
  return restrict_to_vars(full, tang, vars);
}

Jet pow_jet(const Jet& base, int e) {
  Jet acc = Jet::constant(base.space(), 1.0, base.order());
  for (int i = 0; i < e; ++i) acc = acc * base;
  return acc;
}

struct SymBasis {
  // enumeration of the symmetric index pairs a <= b
  std::vector<std::pair<int, int>> pairs;
  explicit SymBasis(int nt) {
    for (int a = 0; a < nt; ++a)
      for (int b = a; b < nt; ++b) pairs.emplace_back(a, b);
  }
  int size() const { return static_cast<int>(pairs.size()); }
};

JetMatrix realified_symmetrized(const JetMatrix& t, double* max_imag, double* asymmetry) {
  const int nt = t.rows();
  const auto sp = t.at(0, 0).space();
  *max_imag = 0.0;
  *asymmetry = 0.0;
  JetMatrix out(sp, nt, nt);
  for (int a = 0; a < nt; ++a)
    for (int b = 0; b < nt; ++b) {
      const Jet sym = 0.5 * (t.at(a, b) + t.at(b, a));
      *asymmetry = std::max(*asymmetry, max_abs_diff(t.at(a, b), t.at(b, a), sym.order()));
      Jet re = Jet::zero(sp, sym.order());
      for (const auto& [m, c] : sym.terms()) {
        *max_imag = std::max(*max_imag, std::abs(c.imag()));
        if (c.real() != 0.0) re.set_coeff(m, Complex(c.real(), 0.0));
      }
      out.at(a, b) = re;
    }
  return out;
}

// entries of q_{1-r} whose boundary restriction depends only on normal
// derivatives of order <= r: everything except the last column above the
// corner (those carry Ricci terms one normal order hotter).
std::vector<std::pair<int, int>> usable_entries(int n) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      if (j != n || i == n) out.emplace_back(i, j);
  return out;
}

}  // namespace

JetMatrix extract_quadratic_form(const QuadraticFormSample& sample,
                                 const std::shared_ptr<const JetSpace>& tangential_space,
                                 FitDiagnostics* diag) {
  const int nt = tangential_space->num_x();
  const SymBasis basis(nt);
  const int nd = static_cast<int>(sample.directions.size());
  if (nd < basis.size())
    throw RankDeficiencyError("extract_quadratic_form: need at least " + std::to_string(basis.size()) +
                              " directions");
  FitDiagnostics local;
  FitDiagnostics* d = diag ? diag : &local;
  d->homogeneity = 0.0;
  for (const auto& v : sample.values)
    d->homogeneity = std::max(d->homogeneity, euler_residual(v, sample.expected_degree));
  if (d->homogeneity > 1e-6)
    throw UsageError("extract_quadratic_form: sampled values are not homogeneous of the expected degree");

  std::vector<double> design;
  design.reserve(static_cast<size_t>(nd) * static_cast<size_t>(basis.size()));
  for (const auto& v : sample.directions)
    for (const auto& [a, b] : basis.pairs) design.push_back((a == b ? 1.0 : 2.0) * v[static_cast<size_t>(a)] * v[static_cast<size_t>(b)]);
  const SmallLinearSolver solver(std::move(design), nd, basis.size());

  std::vector<Jet> sliced;
  sliced.reserve(sample.values.size());
  int order = tangential_space->max_order();
  for (const auto& v : sample.values) {
    sliced.push_back(boundary_slice(v, tangential_space));
    order = std::min(order, sliced.back().order());
  }
  d->trust_order = order;

  JetMatrix out(tangential_space, nt, nt, order);
  d->max_imag = 0.0;
  // per tangential monomial, real and imaginary parts are fitted separately
  for (const auto& mono : tangential_space->monomials()) {
    if (mono.degree() > order) break;
    std::vector<double> yre(static_cast<size_t>(nd)), yim(static_cast<size_t>(nd));
    bool any = false;
    for (int di = 0; di < nd; ++di) {
      const Complex c = sliced[static_cast<size_t>(di)].coeff(mono);
      yre[static_cast<size_t>(di)] = c.real();
      yim[static_cast<size_t>(di)] = c.imag();
      any = any || (c != Complex(0.0, 0.0));
    }
    if (!any) continue;
    const auto xre = solver.solve(yre);
    const auto xim = solver.solve(yim);
    for (int bi = 0; bi < basis.size(); ++bi) {
      const auto [a, b] = basis.pairs[static_cast<size_t>(bi)];
      const Complex val(xre[static_cast<size_t>(bi)], xim[static_cast<size_t>(bi)]);
      d->max_imag = std::max(d->max_imag, std::abs(val.imag()));
      if (val != Complex(0.0, 0.0)) {
        out.at(a, b).set_coeff(mono, val);
        if (a != b) out.at(b, a).set_coeff(mono, val);
      }
    }
  }
  // reproduction residual at every direction
  d->fit_residual = 0.0;
  for (int di = 0; di < nd; ++di) {
    Jet pred = Jet::zero(tangential_space, order);
    for (int bi = 0; bi < basis.size(); ++bi) {
      const auto [a, b] = basis.pairs[static_cast<size_t>(bi)];
      const double w = (a == b ? 1.0 : 2.0) * sample.directions[static_cast<size_t>(di)][static_cast<size_t>(a)] *
                       sample.directions[static_cast<size_t>(di)][static_cast<size_t>(b)];
      pred = pred + w * out.at(a, b);
    }
    d->fit_residual = std::max(d->fit_residual, max_abs_diff(pred, sliced[static_cast<size_t>(di)], order));
  }
  return out;
}

BoundaryNormalMetric reference_extension(const std::vector<JetMatrix>& recovered_orders, const Jet& mu,
                                         const std::shared_ptr<const JetSpace>& x_space) {
  const int n = x_space->num_x();
  const int nt = n - 1;
  const int k = x_space->max_order();
  int order = k;
  for (size_t s = 0; s < recovered_orders.size(); ++s)
    order = std::min(order, recovered_orders[s].min_order() + static_cast<int>(s));
  JetMatrix block(x_space, nt, nt, order);
  double sfact = 1.0;
  for (size_t s = 0; s < recovered_orders.size(); ++s) {
    if (s > 0) sfact *= double(s);
    for (int a = 0; a < nt; ++a)
      for (int b = 0; b < nt; ++b)
        for (const auto& [mono, c] : recovered_orders[s].at(a, b).terms()) {
          MultiIndex full(n);
          for (int v = 0; v < nt; ++v) full.set(v, mono[v]);
          full.set(n - 1, static_cast<int>(s));
          if (full.degree() <= order) block.at(a, b).set_coeff(full, block.at(a, b).coeff(full) + c / sfact);
        }
  }
  return BoundaryNormalMetric::make(x_space, block, mu);
}

JetMatrix trace_form_inversion(const JetMatrix& k, const JetMatrix& g0, const JetMatrix& g0_lower, int n,
                               int r, Jet* h_out) {
  const int nt = n - 1;
  const int coef = (r == 1) ? n + 3 : n + 5;
  const int denom = (r == 1) ? n * n + n - 4 : n * n + 3 * n - 6;
  const auto sp = k.at(0, 0).space();
  Jet h = Jet::zero(sp);
  for (int a = 0; a < nt; ++a)
    for (int b = 0; b < nt; ++b) h = h + k.at(a, b) * g0_lower.at(a, b);
  h = (1.0 / double(denom)) * h;
  if (h_out) *h_out = h;
  JetMatrix out(sp, nt, nt);
  for (int a = 0; a < nt; ++a)
    for (int b = 0; b < nt; ++b)
      out.at(a, b) = (1.0 / double(n + 1)) * (double(coef) * (h * g0.at(a, b)) - k.at(a, b));
  return out;
}

JetMatrix truth_normal_derivative(const BoundaryNormalMetric& truth, int r,
                                  const std::shared_ptr<const JetSpace>& tangential_space) {
  const int n = truth.n;
  const int nt = n - 1;
  double rfact = 1.0;
  for (int i = 2; i <= r; ++i) rfact *= double(i);
  JetMatrix out(tangential_space, nt, nt, std::min(tangential_space->max_order(), truth.space->max_order() - r));
  for (int a = 0; a < nt; ++a)
    for (int b = 0; b < nt; ++b)
      for (const auto& [mono, c] : truth.g_upper.at(a, b).terms()) {
        if (mono[n - 1] != r) continue;
        MultiIndex tang(nt);
        for (int v = 0; v < nt; ++v) tang.set(v, mono[v]);
        if (tang.degree() <= out.at(a, b).order()) out.at(a, b).set_coeff(tang, c * rfact);
      }
  return out;
}

namespace {

// Measured symbol difference on the usable entries, restricted to the
// boundary tangential jets.
std::vector<Jet> sliced_difference(const SymbolMatrix& measured, const SymbolMatrix& reference,
                                   const std::vector<std::pair<int, int>>& entries,
                                   const std::shared_ptr<const JetSpace>& tang, double* euler_out) {
  std::vector<Jet> out;
  out.reserve(entries.size());
  double eu = 0.0;
  for (const auto& [i, j] : entries) {
    const Jet d = measured.entries.at(i, j) - reference.entries.at(i, j);
    eu = std::max(eu, euler_residual(d, measured.degree));
    out.push_back(boundary_slice(d, tang));
  }
  if (euler_out) *euler_out = std::max(*euler_out, eu);
  return out;
}

}  // namespace

RecoveryReport run_recovery(const ForwardData& fd, int depth) {
  const int n = fd.n;
  const int nt = n - 1;
  const int k = fd.jet_order;
  if (depth > fd.depth)
    throw UsageError("run_recovery: requested depth exceeds the dump depth");
  // Each recovered order feeds the next reference extension with two fewer
  // trustworthy orders (one lost to the recursion depth, one to the
  // extension construction), so the budget is steeper than the forward
  // K >= depth + 2 rule.
  const int needed = std::max(depth + 2, 2 * depth);
  if (k < needed)
    throw OrderExhaustedError("run_recovery: depth " + std::to_string(depth) +
                              " requires jet order K >= " + std::to_string(needed) + ", have K = " +
                              std::to_string(k));
  const auto tang = JetSpace::make(nt, 0, k, std::vector<double>(static_cast<size_t>(nt), 0.0));

  RecoveryReport rep;
  rep.n = n;
  rep.depth = depth;
  rep.jet_order = k;
  rep.order1_metric_coefficient = n + 3;
  rep.order1_contraction_denominator = n * n + n - 4;
  rep.higher_metric_coefficient = n + 5;
  rep.higher_contraction_denominator = n * n + 3 * n - 6;
  rep.inversion_denominator = n + 1;

  const int nd = static_cast<int>(fd.directions.size());
  if (nd < nt * (nt + 1) / 2) throw RankDeficiencyError("run_recovery: not enough directions in the dump");

  std::vector<std::vector<double>> dirs;
  std::vector<Jet> norms;  // measured |xi'| per direction, from q1
  dirs.reserve(static_cast<size_t>(nd));
  norms.reserve(static_cast<size_t>(nd));
  for (const auto& dd : fd.directions) {
    dirs.push_back(dd.xi);
    norms.push_back(dd.seq.q(1).entries.at(0, 0));
  }

  // ---- order 0: fit g^{ab}(x', 0) from the squared principal scalar
  {
    QuadraticFormSample sample;
    sample.directions = dirs;
    sample.expected_degree = 2;
    for (const auto& s : norms) sample.values.push_back(s * s);
    OrderResult res;
    res.r = 0;
    FitDiagnostics fit;
    JetMatrix g0raw = extract_quadratic_form(sample, tang, &fit);
    res.fit_residual = fit.fit_residual;
    res.euler = fit.homogeneity;
    res.trust_order = fit.trust_order;
    res.tensor = realified_symmetrized(g0raw, &res.max_imag, &res.asymmetry);
    for (int a = 0; a < nt; ++a)
      for (int b = 0; b < nt; ++b) res.k_base.push_back(res.tensor.at(a, b).value());
    rep.orders.push_back(std::move(res));
  }
  const JetMatrix g0 = rep.orders[0].tensor;
  const JetMatrix g0_lower = inverse(g0);

  std::vector<JetMatrix> recovered{g0};

  for (int r = 1; r <= depth; ++r) {
    const BoundaryNormalMetric ext = reference_extension(recovered, fd.mu, fd.x_space);
    const SystemMatrices ext_mats = assemble(ext);

    std::vector<SymbolSequence> ext_seqs(static_cast<size_t>(nd));
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1)
    for (int di = 0; di < nd; ++di) {
      try {
        ext_seqs[static_cast<size_t>(di)] = compute_symbol_sequence(ext_mats, dirs[static_cast<size_t>(di)], r);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);

    OrderResult res;
    res.r = r;

    // closed-form trace path; load-bearing at r = 1, diagnostic beyond
    {
      QuadraticFormSample sample;
      sample.directions = dirs;
      sample.expected_degree = 2;
      for (int di = 0; di < nd; ++di) {
        const Jet dtr = fd.directions[static_cast<size_t>(di)].seq.q(1 - r).entries.trace() -
                        ext_seqs[static_cast<size_t>(di)].q(1 - r).entries.trace();
        res.euler = std::max(res.euler, euler_residual(dtr, 1 - r));
        sample.values.push_back(-1.0 * (dtr * pow_jet(2.0 * norms[static_cast<size_t>(di)], r + 1)));
      }
      FitDiagnostics fit;
      const JetMatrix k_fit = extract_quadratic_form(sample, tang, &fit);
      Jet h;
      const JetMatrix trace_tensor = trace_form_inversion(k_fit, g0, g0_lower, n, r, &h);
      res.h_base = h.value();
      for (int a = 0; a < nt; ++a)
        for (int b = 0; b < nt; ++b) res.k_base.push_back(k_fit.at(a, b).value());
      if (r == 1) {
        res.fit_residual = fit.fit_residual;
        res.trust_order = fit.trust_order;
        res.tensor = realified_symmetrized(trace_tensor, &res.max_imag, &res.asymmetry);
      }
    }

    if (r >= 2) {
      // Measured linear-response inversion over the entries whose boundary
      // restriction carries only data of normal order <= r. The response to
      // each unit symmetric bump at normal order r is probed with a forward
      // run; the graded system is then solved by least squares.
      const auto entries = usable_entries(n);
      const SymBasis basis(nt);

      std::vector<std::vector<Jet>> delta(static_cast<size_t>(nd));
      int order = tang->max_order();
      for (int di = 0; di < nd; ++di) {
        delta[static_cast<size_t>(di)] = sliced_difference(fd.directions[static_cast<size_t>(di)].seq.q(1 - r),
                                                           ext_seqs[static_cast<size_t>(di)].q(1 - r), entries,
                                                           tang, &res.euler);
        for (const auto& j : delta[static_cast<size_t>(di)]) order = std::min(order, j.order());
      }

      // probes: ext + x_n^r/r! on each basis pair
      double rfact = 1.0;
      for (int i = 2; i <= r; ++i) rfact *= double(i);
      std::vector<SystemMatrices> probe_mats;
      probe_mats.reserve(static_cast<size_t>(basis.size()));
      for (const auto& [a, b] : basis.pairs) {
        JetMatrix block(fd.x_space, nt, nt);
        for (int aa = 0; aa < nt; ++aa)
          for (int bb = 0; bb < nt; ++bb) block.at(aa, bb) = ext.g_upper.at(aa, bb);
        MultiIndex bump(n);
        bump.set(n - 1, r);
        block.at(a, b).set_coeff(bump, block.at(a, b).coeff(bump) + 1.0 / rfact);
        if (a != b) block.at(b, a).set_coeff(bump, block.at(b, a).coeff(bump) + 1.0 / rfact);
        probe_mats.push_back(assemble(BoundaryNormalMetric::make(fd.x_space, block, fd.mu)));
      }
      std::vector<std::vector<std::vector<Jet>>> responses(
          static_cast<size_t>(basis.size()), std::vector<std::vector<Jet>>(static_cast<size_t>(nd)));
      std::exception_ptr perr;
#pragma omp parallel for schedule(dynamic, 1) collapse(2)
      for (int bi = 0; bi < basis.size(); ++bi) {
        for (int di = 0; di < nd; ++di) {
          try {
            const SymbolSequence probe_seq = compute_symbol_sequence(
                probe_mats[static_cast<size_t>(bi)], dirs[static_cast<size_t>(di)], r);
            responses[static_cast<size_t>(bi)][static_cast<size_t>(di)] = sliced_difference(
                probe_seq.q(1 - r), ext_seqs[static_cast<size_t>(di)].q(1 - r), entries, tang, nullptr);
          } catch (...) {
#pragma omp critical
            if (!perr) perr = std::current_exception();
          }
        }
      }
      if (perr) std::rethrow_exception(perr);
      for (const auto& per_dir : responses)
        for (const auto& per_entry : per_dir)
          for (const auto& j : per_entry) order = std::min(order, j.order());

      // base response matrix; rows stack (direction, entry, re/im)
      const int neq = nd * static_cast<int>(entries.size());
      std::vector<double> a0;
      a0.reserve(static_cast<size_t>(2 * neq) * static_cast<size_t>(basis.size()));
      for (int di = 0; di < nd; ++di)
        for (size_t ei = 0; ei < entries.size(); ++ei)
          for (int bi = 0; bi < basis.size(); ++bi)
            a0.push_back(responses[static_cast<size_t>(bi)][static_cast<size_t>(di)][ei].value().real());
      for (int di = 0; di < nd; ++di)
        for (size_t ei = 0; ei < entries.size(); ++ei)
          for (int bi = 0; bi < basis.size(); ++bi)
            a0.push_back(responses[static_cast<size_t>(bi)][static_cast<size_t>(di)][ei].value().imag());
      const SmallLinearSolver solver(std::move(a0), 2 * neq, basis.size());
      res.response_condition = solver.min_pivot;

      // graded forward substitution: at each degree the unsolved part of
      // delta - sum_b M_b * H_b is linear in the new coefficients via the
      // base values of the responses
      std::vector<Jet> h(static_cast<size_t>(basis.size()), Jet::zero(tang, order));
      for (int ell = 0; ell <= order; ++ell) {
        std::vector<Jet> resid;
        resid.reserve(static_cast<size_t>(neq));
        for (int di = 0; di < nd; ++di)
          for (size_t ei = 0; ei < entries.size(); ++ei) {
            Jet acc = delta[static_cast<size_t>(di)][ei];
            for (int bi = 0; bi < basis.size(); ++bi)
              acc = acc - responses[static_cast<size_t>(bi)][static_cast<size_t>(di)][ei] * h[static_cast<size_t>(bi)];
            resid.push_back(acc.truncated(order));
          }
        for (const auto& mono : tang->monomials()) {
          if (mono.degree() != ell) continue;
          std::vector<double> y(static_cast<size_t>(2 * neq), 0.0);
          bool any = false;
          for (int e = 0; e < neq; ++e) {
            const Complex c = resid[static_cast<size_t>(e)].coeff(mono);
            y[static_cast<size_t>(e)] = c.real();
            y[static_cast<size_t>(e + neq)] = c.imag();
            any = any || (c != Complex(0.0, 0.0));
          }
          if (!any) continue;
          const auto sol = solver.solve(y);
          for (int bi = 0; bi < basis.size(); ++bi)
            if (sol[static_cast<size_t>(bi)] != 0.0)
              h[static_cast<size_t>(bi)].set_coeff(mono, h[static_cast<size_t>(bi)].coeff(mono) + sol[static_cast<size_t>(bi)]);
        }
      }
      // residual after the full solve
      res.fit_residual = 0.0;
      for (int di = 0; di < nd; ++di)
        for (size_t ei = 0; ei < entries.size(); ++ei) {
          Jet acc = delta[static_cast<size_t>(di)][ei];
          for (int bi = 0; bi < basis.size(); ++bi)
            acc = acc - responses[static_cast<size_t>(bi)][static_cast<size_t>(di)][ei] * h[static_cast<size_t>(bi)];
          res.fit_residual = std::max(res.fit_residual, acc.max_abs(order));
        }

      JetMatrix tensor(tang, nt, nt, order);
      for (int bi = 0; bi < basis.size(); ++bi) {
        const auto [a, b] = basis.pairs[static_cast<size_t>(bi)];
        tensor.at(a, b) = h[static_cast<size_t>(bi)];
        tensor.at(b, a) = h[static_cast<size_t>(bi)];
      }
      res.trust_order = order;
      res.tensor = realified_symmetrized(tensor, &res.max_imag, &res.asymmetry);
    }

    recovered.push_back(res.tensor);
    rep.orders.push_back(std::move(res));
  }
  return rep;
}

TruthComparison compare_to_truth(const RecoveryReport& report, const BoundaryNormalMetric& truth) {
  TruthComparison cmp;
  const int nt = report.n - 1;
  for (const auto& res : report.orders) {
    const auto tang = res.tensor.at(0, 0).space();
    const JetMatrix expected = truth_normal_derivative(truth, res.r, tang);
    TruthComparison::PerOrder po;
    po.r = res.r;
    po.compared_order = std::min(res.trust_order, expected.min_order());
    double scale = 0.0;
    for (int a = 0; a < nt; ++a)
      for (int b = 0; b < nt; ++b) {
        po.abs_err = std::max(po.abs_err, max_abs_diff(res.tensor.at(a, b), expected.at(a, b), po.compared_order));
        scale = std::max(scale, expected.at(a, b).max_abs(po.compared_order));
      }
    po.rel_err = po.abs_err / std::max(scale, 1.0);
    cmp.max_rel_err = std::max(cmp.max_rel_err, po.rel_err);
    cmp.orders.push_back(po);
  }
  return cmp;
}

}  // namespace stokesdtn
