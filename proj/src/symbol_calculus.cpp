#include "stokesdtn/symbol_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace stokesdtn {

namespace {

Complex minus_i_pow(int k) {
  switch (k & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

double multiindex_factorial(const MultiIndex& m) {
  double f = 1.0;
  for (int v = 0; v < m.nvars(); ++v)
    for (int e = 2; e <= m[v]; ++e) f *= double(e);
  return f;
}

// All multi-indices of total degree `total` over `slots` positions.
std::vector<MultiIndex> compositions(int total, int slots) {
  std::vector<MultiIndex> out;
  if (slots == 0) {
    if (total == 0) out.push_back(MultiIndex(0));
    return out;
  }
  std::vector<int> e(static_cast<size_t>(slots), 0);
  std::function<void(int, int)> rec = [&](int v, int rem) {
    if (v == slots - 1) {
      e[static_cast<size_t>(v)] = rem;
      MultiIndex m(slots);
      for (int i = 0; i < slots; ++i) m.set(i, e[static_cast<size_t>(i)]);
      out.push_back(m);
      return;
    }
    for (int d = 0; d <= rem; ++d) {
      e[static_cast<size_t>(v)] = d;
      rec(v + 1, rem - d);
    }
  };
  rec(0, total);
  return out;
}

JetMatrix derive_xi(const JetMatrix& m, const JetSpace& sp, const MultiIndex& j) {
  JetMatrix out = m;
  for (int a = 0; a < j.nvars(); ++a)
    for (int e = 0; e < j[a]; ++e) out = out.partial(sp.var_xi(a));
  return out;
}

JetMatrix derive_x_tangential(const JetMatrix& m, const JetSpace& sp, const MultiIndex& j) {
  JetMatrix out = m;
  for (int a = 0; a < j.nvars(); ++a)
    for (int e = 0; e < j[a]; ++e) out = out.partial(sp.var_x(a));
  return out;
}

}  // namespace

const SymbolMatrix& SymbolSequence::q(int degree) const {
  const int idx = 1 - degree;
  if (idx < 0 || idx >= static_cast<int>(symbols.size()))
    throw UsageError("SymbolSequence: degree " + std::to_string(degree) + " not computed");
  return symbols[static_cast<size_t>(idx)];
}

SymbolMatrix& SymbolSequence::q(int degree) {
  return const_cast<SymbolMatrix&>(static_cast<const SymbolSequence*>(this)->q(degree));
}

std::shared_ptr<const JetSpace> joint_space(const std::shared_ptr<const JetSpace>& x_space,
                                            const std::vector<double>& direction) {
  const int n = x_space->num_x();
  if (static_cast<int>(direction.size()) != n - 1)
    throw UsageError("joint_space: direction must have n-1 components");
  std::vector<double> base = x_space->base_point();
  base.insert(base.end(), direction.begin(), direction.end());
  return JetSpace::make(n, n - 1, x_space->max_order(), std::move(base));
}

SymbolizedSystem symbolize(const SystemMatrices& mats, const std::vector<double>& direction) {
  const int n = mats.n;
  const int N = n + 1;
  SymbolizedSystem sys;
  sys.n = n;
  sys.direction = direction;
  sys.space = joint_space(mats.space, direction);
  const auto& sp = sys.space;

  std::vector<Jet> xi;
  xi.reserve(static_cast<size_t>(n - 1));
  for (int a = 0; a < n - 1; ++a) xi.push_back(Jet::variable(sp, sp->var_xi(a)));

  auto to_symbol = [&](const OpMatrix& op, int degree) {
    SymbolMatrix s;
    s.degree = degree;
    s.entries = JetMatrix(sp, N, N);
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) {
        Jet acc = Jet::zero(sp);
        for (const auto& [beta, coeff] : op.at(r, c).terms) {
          if (beta[sp->var_normal()] != 0)
            throw UsageError("symbolize: normal derivative survived in a tangential operator");
          Jet term = promote(coeff, sp);
          for (int a = 0; a < n - 1; ++a)
            for (int e = 0; e < beta[a]; ++e) term = Complex(0.0, 1.0) * (term * xi[static_cast<size_t>(a)]);
          acc = acc + term;
        }
        s.entries.at(r, c) = acc;
      }
    return s;
  };

  sys.b = to_symbol(mats.b, 0);
  sys.c2 = to_symbol(mats.c2, 2);
  sys.c1 = to_symbol(mats.c1, 1);
  sys.c0 = to_symbol(mats.c0, 0);
  return sys;
}

Jet cotangent_norm(const SymbolizedSystem& sys) {
  // c2 = -|xi'|^2 I; off-diagonal entries vanish by construction.
  return sqrt(-sys.c2.entries.at(0, 0));
}

SymbolMatrix principal_symbol(const SymbolizedSystem& sys) {
  const int N = sys.n + 1;
  SymbolMatrix q1;
  q1.degree = 1;
  q1.entries = JetMatrix(sys.space, N, N);
  const Jet s = cotangent_norm(sys);
  for (int i = 0; i < N; ++i) q1.entries.at(i, i) = s;
  return q1;
}

std::vector<RhsTerm> rhs_contributions(int d, int lowest_degree, int num_tangential) {
  std::vector<RhsTerm> out;
  for (int j = lowest_degree; j <= 1; ++j)
    for (int k = lowest_degree; k <= 1; ++k) {
      const int len = j + k - d;
      if (len < 0) continue;
      for (const auto& jj : compositions(len, num_tangential))
        out.push_back({j, k, jj, minus_i_pow(len) / multiindex_factorial(jj)});
    }
  return out;
}

SymbolMatrix symbol_rhs(int d, const SymbolSequence& have, const SymbolizedSystem& sys) {
  if (d > 1) throw UsageError("symbol_rhs: degree grouping starts at 1");
  const auto& sp = *sys.space;
  const int normal = sp.var_normal();
  const SymbolMatrix& qd = have.q(d);

  JetMatrix e = sys.b.entries * qd.entries;
  e = e + qd.entries.partial(normal);
  if (d == 1) e = e - sys.c1.entries;
  if (d == 0) e = e - sys.c0.entries;

  for (const auto& t : rhs_contributions(d, d, sys.n - 1)) {
    const JetMatrix left = derive_xi(have.q(t.j).entries, sp, t.derivative);
    const JetMatrix right = derive_x_tangential(have.q(t.k).entries, sp, t.derivative);
    e = e - t.scale * (left * right);
  }

  SymbolMatrix rhs;
  rhs.degree = d;
  rhs.entries = std::move(e);
  if (rhs.min_order() < 0)
    throw OrderExhaustedError("symbol_rhs: jet order exhausted at degree " + std::to_string(d) +
                              "; need jet order K >= " + std::to_string(sp.max_order() - rhs.min_order()));
  return rhs;
}

SymbolMatrix symbol_rhs_deg1_direct(const SymbolSequence& have, const SymbolizedSystem& sys) {
  // i sum_a d_xi_a q1 d_x_a q1 + b q1 + d_n q1 - c1, written as displayed.
  const auto& sp = *sys.space;
  const JetMatrix& q1 = have.q(1).entries;
  JetMatrix e = sys.b.entries * q1;
  e = e + q1.partial(sp.var_normal());
  e = e - sys.c1.entries;
  for (int a = 0; a < sys.n - 1; ++a)
    e = e + Complex(0.0, 1.0) * (q1.partial(sp.var_xi(a)) * q1.partial(sp.var_x(a)));
  return {std::move(e), 1};
}

SymbolMatrix symbol_rhs_deg0_direct(const SymbolSequence& have, const SymbolizedSystem& sys) {
  const auto& sp = *sys.space;
  const JetMatrix& q1 = have.q(1).entries;
  const JetMatrix& q0 = have.q(0).entries;
  JetMatrix e = sys.b.entries * q0;
  e = e + q0.partial(sp.var_normal());
  e = e - sys.c0.entries;
  e = e - q0 * q0;
  for (int a = 0; a < sys.n - 1; ++a) {
    e = e + Complex(0.0, 1.0) * (q1.partial(sp.var_xi(a)) * q0.partial(sp.var_x(a)));
    e = e + Complex(0.0, 1.0) * (q0.partial(sp.var_xi(a)) * q1.partial(sp.var_x(a)));
  }
  for (int a = 0; a < sys.n - 1; ++a)
    for (int b = 0; b < sys.n - 1; ++b) {
      const JetMatrix dxi = q1.partial(sp.var_xi(a)).partial(sp.var_xi(b));
      const JetMatrix dx = q1.partial(sp.var_x(a)).partial(sp.var_x(b));
      e = e + Complex(0.5, 0.0) * (dxi * dx);
    }
  return {std::move(e), 0};
}

SymbolMatrix next_symbol(const SymbolMatrix& rhs, const SymbolMatrix& q1) {
  const Jet inv_2s = reciprocal(2.0 * q1.entries.at(0, 0));
  SymbolMatrix q;
  q.degree = rhs.degree - 1;
  q.entries = inv_2s * rhs.entries;
  return q;
}

SymbolSequence compute_symbol_sequence(const SystemMatrices& mats, const std::vector<double>& direction,
                                       int depth) {
  if (depth < 0) throw UsageError("compute_symbol_sequence: depth must be >= 0");
  const int k = mats.space->max_order();
  if (k < depth + 2)
    throw OrderExhaustedError("compute_symbol_sequence: depth " + std::to_string(depth) +
                              " requires jet order K >= " + std::to_string(depth + 2) + ", have K = " +
                              std::to_string(k));
  SymbolSequence seq;
  seq.n = mats.n;
  seq.direction = direction;
  seq.depth = depth;
  const SymbolizedSystem sys = symbolize(mats, direction);
  seq.space = sys.space;
  seq.symbols.push_back(principal_symbol(sys));
  for (int step = 1; step <= depth; ++step) {
    const int d = 2 - step;
    const SymbolMatrix rhs = symbol_rhs(d, seq, sys);
    seq.symbols.push_back(next_symbol(rhs, seq.q(1)));
  }
  return seq;
}

SymbolSequence compute_symbol_sequence(const BoundaryNormalMetric& m, const std::vector<double>& direction,
                                       int depth) {
  return compute_symbol_sequence(assemble(m), direction, depth);
}

std::vector<DegreeResidual> full_symbol_residual(const SymbolSequence& seq, const SymbolizedSystem& sys) {
  const auto& sp = *sys.space;
  const int N = sys.n + 1;
  const int lo = 1 - seq.depth;
  std::vector<DegreeResidual> out;
  for (int d = 2; d >= 2 - seq.depth; --d) {
    JetMatrix r(sys.space, N, N);
    double scale = 0.0;
    for (const auto& t : rhs_contributions(d, lo, sys.n - 1)) {
      const JetMatrix left = derive_xi(seq.q(t.j).entries, sp, t.derivative);
      const JetMatrix right = derive_x_tangential(seq.q(t.k).entries, sp, t.derivative);
      const JetMatrix term = t.scale * (left * right);
      scale = std::max(scale, term.max_abs(term.min_order()));
      r = r + term;
    }
    if (d >= lo && d <= 1) {
      const JetMatrix bq = sys.b.entries * seq.q(d).entries;
      const JetMatrix dn = seq.q(d).entries.partial(sp.var_normal());
      scale = std::max({scale, bq.max_abs(bq.min_order()), dn.max_abs(dn.min_order())});
      r = r - bq - dn;
    }
    const SymbolMatrix* c = nullptr;
    if (d == 2) c = &sys.c2;
    if (d == 1) c = &sys.c1;
    if (d == 0) c = &sys.c0;
    if (c) {
      scale = std::max(scale, c->entries.max_abs(c->entries.min_order()));
      r = r + c->entries;
    }
    DegreeResidual res;
    res.degree = d;
    res.order = r.min_order();
    res.abs_norm = r.max_abs(res.order);
    res.scale = scale;
    res.rel_norm = res.abs_norm / std::max(scale, 1.0);
    out.push_back(res);
  }
  return out;
}

double euler_residual(const Jet& q, int degree) {
  const auto& sp = q.space();
  Jet acc = Jet::zero(sp, q.order() - 1);
  for (int a = 0; a < sp->num_xi(); ++a)
    acc = acc + Jet::variable(sp, sp->var_xi(a)) * partial(q, sp->var_xi(a));
  acc = acc - double(degree) * q;
  const double scale = std::max(q.max_abs(acc.order()), 1.0);
  return acc.max_abs(acc.order()) / scale;
}

double euler_residual(const SymbolMatrix& s, const std::shared_ptr<const JetSpace>&) {
  double mx = 0.0;
  for (int i = 0; i < s.entries.rows(); ++i)
    for (int j = 0; j < s.entries.cols(); ++j) mx = std::max(mx, euler_residual(s.entries.at(i, j), s.degree));
  return mx;
}

}  // namespace stokesdtn
