#include <doctest.h>

#include "stokesdtn/symbol_calculus.hpp"
#include "test_support.hpp"

using namespace stokesdtn;

namespace {

std::shared_ptr<const JetSpace> xspace(int n, int order) {
  return JetSpace::make(n, 0, order, std::vector<double>(static_cast<size_t>(n), 0.0));
}

BoundaryNormalMetric flat(int n, int order) {
  auto sp = xspace(n, order);
  JetMatrix block(sp, n - 1, n - 1);
  for (int a = 0; a < n - 1; ++a) block.at(a, a) = Jet::constant(sp, 1.0);
  return BoundaryNormalMetric::make(sp, block, Jet::constant(sp, 1.0));
}

// metric whose tangential block depends on x_n only (n = 2)
BoundaryNormalMetric normal_only_metric(int order) {
  auto sp = xspace(2, order);
  Jet g11 = Jet::constant(sp, 1.0);
  MultiIndex xn(2);
  xn.set(1, 1);
  g11.set_coeff(xn, 0.4);
  xn.set(1, 2);
  g11.set_coeff(xn, 0.1);
  JetMatrix block(sp, 1, 1);
  block.at(0, 0) = g11;
  return BoundaryNormalMetric::make(sp, block, Jet::constant(sp, 1.0));
}

// drop every term with a nonzero normal exponent from the tangential block
BoundaryNormalMetric zero_normal_jets(const BoundaryNormalMetric& m) {
  const int nt = m.n - 1;
  JetMatrix block(m.space, nt, nt);
  for (int a = 0; a < nt; ++a)
    for (int b = 0; b < nt; ++b) {
      Jet e = Jet::zero(m.space);
      for (const auto& [mono, c] : m.g_upper.at(a, b).terms())
        if (mono[m.n - 1] == 0) e.set_coeff(mono, c);
      block.at(a, b) = e;
    }
  return BoundaryNormalMetric::make(m.space, block, m.mu);
}

}  // namespace

TEST_CASE("symbolize: flat patterns") {
  const auto sys = symbolize(assemble(flat(2, 5)), {1.0});
  const auto sp = sys.space;
  const Jet xi1 = Jet::variable(sp, sp->var_xi(0));

  // c2 = -xi1^2 I
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Jet expect = (i == j) ? Complex(-1.0, 0.0) * (xi1 * xi1) : Jet::zero(sp);
      CHECK(max_abs_diff(sys.c2.entries.at(i, j), expect, 5) < 1e-15);
    }
  // c1 bottom-left = (i xi1, 0), everything else zero
  CHECK(max_abs_diff(sys.c1.entries.at(2, 0), Complex(0.0, 1.0) * xi1, 5) < 1e-15);
  CHECK(sys.c1.entries.at(2, 1).max_abs() < 1e-15);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(sys.c1.entries.at(i, j).max_abs() < 1e-15);
  // b bottom-left = (0, 1)
  CHECK(std::abs(sys.b.entries.at(2, 1).value() - Complex(1.0)) < 1e-15);
  CHECK(sys.b.entries.at(2, 0).max_abs() < 1e-15);
  CHECK(sys.c0.entries.max_abs() < 1e-15);
}

TEST_CASE("symbolize: c0 is the multiplication part verbatim and c2 is the metric form") {
  const auto m = testsupport::random_metric(3, 5, 3);
  const auto mats = assemble(m);
  const std::vector<double> dir{0.6, 0.8};
  const auto sys = symbolize(mats, dir);
  // c0 entries equal the promoted multiplication coefficients of C0
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; j <= 3; ++j) {
      Jet expect = Jet::zero(sys.space);
      const auto& terms = mats.c0.at(i, j).terms;
      if (!terms.empty()) expect = promote(terms.begin()->second, sys.space);
      CHECK(max_abs_diff(sys.c0.entries.at(i, j), expect, 3) < 1e-14);
    }
  // c2 base value = -(g^{ab}(0) xi_a xi_b)
  double quad = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) quad += m.g_upper.at(a, b).value().real() * dir[static_cast<size_t>(a)] * dir[static_cast<size_t>(b)];
  CHECK(std::abs(sys.c2.entries.at(0, 0).value() - Complex(-quad)) < 1e-14);
}

TEST_CASE("principal symbol") {
  {
    const auto sys = symbolize(assemble(flat(2, 5)), {1.0});
    const auto q1 = principal_symbol(sys);
    CHECK(q1.entries.at(0, 0).value() == Complex(1.0, 0.0));  // exact at the base
    CHECK(q1.degree == 1);
    // q1^2 + c2 = 0 by construction; assert anyway
    const JetMatrix resid = q1.entries * q1.entries + sys.c2.entries;
    CHECK(resid.max_abs(4) < 1e-14);
  }
  {
    // conformal g^{11} = 1 + x2: the x2 coefficient of q1 at xi = (1) is 1/2
    auto sp = xspace(2, 5);
    JetMatrix block(sp, 1, 1);
    block.at(0, 0) = Jet::constant(sp, 1.0) + Jet::variable(sp, 1);
    const auto m = BoundaryNormalMetric::make(sp, block, Jet::constant(sp, 1.0));
    const auto sys = symbolize(assemble(m), {1.0});
    const auto q1 = principal_symbol(sys);
    MultiIndex x2(sys.space->vars());
    x2.set(1, 1);
    CHECK(std::abs(q1.entries.at(0, 0).coeff(x2) - Complex(0.5)) < 1e-14);
    const JetMatrix resid = q1.entries * q1.entries + sys.c2.entries;
    CHECK(resid.max_abs(4) / std::max(1.0, sys.c2.entries.max_abs(4)) < 1e-13);
  }
}

TEST_CASE("rhs grouping: flat closed form at first step") {
  const auto sys = symbolize(assemble(flat(2, 5)), {1.0});
  SymbolSequence seq;
  seq.n = 2;
  seq.direction = {1.0};
  seq.space = sys.space;
  seq.symbols.push_back(principal_symbol(sys));
  const auto e1 = symbol_rhs(1, seq, sys);
  // E1 = |xi| B - c1: bottom-left row (-i xi1, |xi1|)
  const Jet s = cotangent_norm(sys);
  const Jet xi1 = Jet::variable(sys.space, sys.space->var_xi(0));
  CHECK(max_abs_diff(e1.entries.at(2, 0), Complex(0.0, -1.0) * xi1, 4) < 1e-14);
  CHECK(max_abs_diff(e1.entries.at(2, 1), s, 4) < 1e-14);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(e1.entries.at(i, j).max_abs(4) < 1e-14);
}

TEST_CASE("trace of the first rhs matches the closed normal-derivative form") {
  // metric depending on x_n only, unit viscosity: every tangential term
  // vanishes and tr E1 = (n+3) Gamma^a_an |xi| + (n+1) d_n |xi| exactly
  const auto m = normal_only_metric(6);
  const auto md = MetricData::build(m);
  const auto sys = symbolize(assemble(md), {1.0});
  SymbolSequence seq;
  seq.n = 2;
  seq.direction = {1.0};
  seq.space = sys.space;
  seq.symbols.push_back(principal_symbol(sys));
  const Jet tr_e1 = symbol_rhs(1, seq, sys).entries.trace();

  Jet gamma_tan = Jet::zero(m.space);
  for (int a = 0; a < m.n - 1; ++a) gamma_tan = gamma_tan + md.gamma.at(a, a, m.n - 1);
  const Jet s = cotangent_norm(sys);
  const Jet expect = double(m.n + 3) * (promote(gamma_tan, sys.space) * s) +
                     double(m.n + 1) * partial(s, sys.space->var_normal());
  CHECK(max_abs_diff(tr_e1, expect, 4) / std::max(1.0, expect.max_abs(4)) < 1e-12);
}

TEST_CASE("trace of the first rhs: remainder depends only on boundary-order-0 data") {
  // subtracting the displayed normal-derivative terms, the boundary slice
  // must agree between a metric and its zero-normal-derivative sibling
  const auto m1 = testsupport::random_metric(3, 6, 29);
  const auto m2 = zero_normal_jets(m1);
  const std::vector<double> dir{0.8, 0.5};
  auto remainder_slice = [&](const BoundaryNormalMetric& m) {
    const auto md = MetricData::build(m);
    const auto sys = symbolize(assemble(md), dir);
    SymbolSequence seq;
    seq.n = m.n;
    seq.direction = dir;
    seq.space = sys.space;
    seq.symbols.push_back(principal_symbol(sys));
    const Jet tr_e1 = symbol_rhs(1, seq, sys).entries.trace();
    Jet gamma_tan = Jet::zero(m.space);
    for (int a = 0; a < m.n - 1; ++a) gamma_tan = gamma_tan + md.gamma.at(a, a, m.n - 1);
    const Jet s = cotangent_norm(sys);
    const Jet rem = tr_e1 - double(m.n + 3) * (promote(gamma_tan, sys.space) * s) -
                    double(m.n + 1) * partial(s, sys.space->var_normal());
    auto tang = JetSpace::make(m.n - 1 + 2, 0, 6, {0.0, 0.0, dir[0], dir[1]});  // keep x' and xi
    const std::vector<int> kept{0, 1, 3, 4};
    return restrict_to_vars(rem, tang, kept);
  };
  const Jet r1 = remainder_slice(m1);
  const Jet r2 = remainder_slice(m2);
  CHECK(max_abs_diff(r1, r2, 3) / std::max(1.0, r1.max_abs(3)) < 1e-10);
}

TEST_CASE("rhs contribution enumeration") {
  // degree -1 grouping: pairs (j,k) in {-1,0,1}^2 with |J| = j+k+1 >= 0
  const auto terms = rhs_contributions(-1, -1, 1);
  int pair_count = 0;
  for (const auto& t : terms) {
    CHECK(t.derivative.degree() == t.j + t.k + 1);
    pair_count++;
  }
  // one tangential slot: one multi-index per (j,k), eight admissible pairs
  CHECK(pair_count == 8);

  // two tangential slots: |J| = L has L+1 compositions
  const auto terms2 = rhs_contributions(-1, -1, 2);
  int expected = 0;
  for (int j = -1; j <= 1; ++j)
    for (int k = -1; k <= 1; ++k)
      if (j + k + 1 >= 0) expected += j + k + 2;
  CHECK(static_cast<int>(terms2.size()) == expected);
}

TEST_CASE("grouping consistency: generic rhs equals the displayed low-step forms") {
  const auto m = testsupport::random_metric(3, 6, 37);
  const auto mats = assemble(m);
  const std::vector<double> dir{1.0, 0.4};
  const auto sys = symbolize(mats, dir);
  SymbolSequence seq;
  seq.n = 3;
  seq.direction = dir;
  seq.space = sys.space;
  seq.symbols.push_back(principal_symbol(sys));

  const auto rhs1 = symbol_rhs(1, seq, sys);
  const auto rhs1d = symbol_rhs_deg1_direct(seq, sys);
  CHECK(max_abs_diff(rhs1.entries, rhs1d.entries, rhs1.min_order()) /
            std::max(1.0, rhs1.entries.max_abs(rhs1.min_order())) <
        1e-12);

  seq.symbols.push_back(next_symbol(rhs1, seq.q(1)));
  const auto rhs0 = symbol_rhs(0, seq, sys);
  const auto rhs0d = symbol_rhs_deg0_direct(seq, sys);
  CHECK(max_abs_diff(rhs0.entries, rhs0d.entries, rhs0.min_order()) /
            std::max(1.0, rhs0.entries.max_abs(rhs0.min_order())) <
        1e-12);
}

TEST_CASE("next_symbol") {
  const auto sys = symbolize(assemble(flat(2, 5)), {1.0});
  const auto q1 = principal_symbol(sys);
  SymbolMatrix e;
  e.degree = 1;
  e.entries = (2.0 * cotangent_norm(sys)) * JetMatrix::identity(sys.space, 3);
  const auto q = next_symbol(e, q1);
  CHECK(max_abs_diff(q.entries, JetMatrix::identity(sys.space, 3), 4) < 1e-13);
  CHECK(q.degree == 0);
}

TEST_CASE("flat symbol sequence is closed form") {
  for (int n : {2, 3}) {
    const auto m = flat(n, 6);
    std::vector<double> dir(static_cast<size_t>(n - 1), 0.0);
    dir[0] = 1.0;
    const auto seq = compute_symbol_sequence(m, dir, 2);
    REQUIRE(seq.symbols.size() == 3);

    // q0: only the bottom-left row (delta_nk - i xi_k / |xi|)/2
    const auto sp = seq.space;
    const Jet inv2s = reciprocal(2.0 * seq.q(1).entries.at(0, 0));
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        Jet expect = Jet::zero(sp, seq.q(0).entries.at(i, j).order());
        if (i == n && j < n) {
          if (j == n - 1)
            expect = Jet::constant(sp, 0.5, expect.order());
          else
            expect = Complex(0.0, -1.0) * (Jet::variable(sp, sp->var_xi(j)) * inv2s);
        }
        CHECK(max_abs_diff(seq.q(0).entries.at(i, j), expect, 4) < 1e-13);
      }
    CHECK(seq.q(0).entries.trace().max_abs(4) < 1e-13);
    // q_{-1} vanishes outright
    CHECK(seq.q(-1).entries.max_abs(3) < 1e-13);
  }
}

TEST_CASE("depth zero gives only the principal symbol") {
  const auto seq = compute_symbol_sequence(flat(2, 3), {1.0}, 0);
  CHECK(seq.symbols.size() == 1);
  CHECK(seq.symbols[0].degree == 1);
}

TEST_CASE("insufficient jet order is refused with the needed bound") {
  const auto m = testsupport::random_metric(2, 4, 2);
  try {
    compute_symbol_sequence(m, {1.0}, 3);
    FAIL("expected OrderExhaustedError");
  } catch (const OrderExhaustedError& e) {
    CHECK(std::string(e.what()).find("K >= 5") != std::string::npos);
  }
}

TEST_CASE("full symbol residual vanishes per degree") {
  {
    const auto mats = assemble(flat(2, 6));
    const auto sys = symbolize(mats, {1.0});
    const auto seq = compute_symbol_sequence(mats, {1.0}, 4);
    for (const auto& res : full_symbol_residual(seq, sys)) CHECK(res.rel_norm < 1e-12);
  }
  for (uint64_t seed : {5u, 6u}) {
    const RandomScenario sc = make_random_scenario(2, 6, seed);
    const auto mats = assemble(sc.metric);
    const auto sys = symbolize(mats, sc.directions[0]);
    const auto seq = compute_symbol_sequence(mats, sc.directions[0], 4);
    for (const auto& res : full_symbol_residual(seq, sys)) {
      if (res.degree == 2)
        CHECK(res.rel_norm < 1e-13);
      else
        CHECK(res.rel_norm < 1e-9);
    }
  }
}

TEST_CASE("homogeneity of every computed symbol") {
  const RandomScenario sc = make_random_scenario(3, 6, 9);
  const auto mats = assemble(sc.metric);
  for (const auto& dir : sc.directions) {
    const auto seq = compute_symbol_sequence(mats, dir, 3);
    for (const auto& s : seq.symbols) CHECK(euler_residual(s, seq.space) < 1e-10);
  }
}

TEST_CASE("direction covariance: scaling the base direction rescales by degree") {
  const auto m = testsupport::random_metric(2, 6, 14);
  const auto mats = assemble(m);
  const double lambda = 1.7;
  const auto seq1 = compute_symbol_sequence(mats, {1.0}, 3);
  const auto seq2 = compute_symbol_sequence(mats, {lambda}, 3);
  for (int deg = 1; deg >= -2; --deg) {
    const double factor = std::pow(lambda, deg);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const Complex a = seq1.q(deg).entries.at(i, j).value();
        const Complex b = seq2.q(deg).entries.at(i, j).value();
        worst = std::max(worst, std::abs(b - factor * a));
      }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("principal symbol is real, diagonal and positive at the base") {
  const RandomScenario sc = make_random_scenario(3, 5, 44);
  const auto seq = compute_symbol_sequence(sc.metric, sc.directions[2], 0);
  const auto& q1 = seq.q(1).entries;
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; j <= 3; ++j) {
      if (i == j) {
        CHECK(q1.at(i, i).value().real() > 0.0);
        CHECK(std::abs(q1.at(i, i).value().imag()) < 1e-14);
      } else {
        CHECK(q1.at(i, j).max_abs() == 0.0);
      }
    }
}
