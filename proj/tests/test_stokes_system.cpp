#include <doctest.h>

#include "stokesdtn/stokes_system.hpp"
#include "test_support.hpp"

using namespace stokesdtn;

namespace {

std::shared_ptr<const JetSpace> xspace(int n, int order) {
  return JetSpace::make(n, 0, order, std::vector<double>(static_cast<size_t>(n), 0.0));
}

BoundaryNormalMetric flat(int n, int order, double mu_val = 1.0) {
  auto sp = xspace(n, order);
  JetMatrix block(sp, n - 1, n - 1);
  for (int a = 0; a < n - 1; ++a) block.at(a, a) = Jet::constant(sp, 1.0);
  return BoundaryNormalMetric::make(sp, block, Jet::constant(sp, mu_val));
}

}  // namespace

TEST_CASE("strain tensor") {
  const auto m = flat(2, 4);
  const auto md = MetricData::build(m);
  const Jet x1 = Jet::variable(m.space, 0);
  const Jet x2 = Jet::variable(m.space, 1);

  // rotation field is Killing: zero strain
  const JetMatrix s_rot = strain_mixed(md, {-1.0 * x2, x1});
  CHECK(s_rot.max_abs() < 1e-15);

  const JetMatrix s = strain_mixed(md, {x1, Jet::zero(m.space)});
  CHECK(std::abs(s.at(0, 0).value() - Complex(2.0)) < 1e-15);
  CHECK(s.at(0, 1).max_abs() < 1e-15);
  CHECK(s.at(1, 0).max_abs() < 1e-15);
  CHECK(s.at(1, 1).max_abs() < 1e-15);

  // symmetry of the fully raised strain on a random scenario
  const auto rm = testsupport::random_metric(3, 5, 31);
  const auto rmd = MetricData::build(rm);
  std::vector<Jet> u;
  for (int j = 0; j < 3; ++j) u.push_back(testsupport::rj(rm.space, 300 + static_cast<uint64_t>(j)));
  const JetMatrix su = strain_upper(rmd, u);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) CHECK(max_abs_diff(su.at(j, k), su.at(k, j), 4) < 1e-12);
}

TEST_CASE("stress tensor") {
  const auto m = flat(2, 4);
  const auto md = MetricData::build(m);
  const std::vector<Jet> zero_u{Jet::zero(m.space), Jet::zero(m.space)};
  const JetMatrix sig = stress_upper(md, zero_u, Jet::constant(m.space, 1.0));
  CHECK(max_abs_diff(sig, Complex(-1.0, 0.0) * JetMatrix::identity(m.space, 2), 4) == 0.0);

  std::vector<Jet> u{testsupport::rj(m.space, 41), testsupport::rj(m.space, 42)};
  CHECK(max_abs_diff(stress_upper(md, u, Jet::zero(m.space)), strain_upper(md, u), 3) == 0.0);

  // trace identity: sigma^{jk} g_jk = mu tr(Su) - n p
  const auto rm = testsupport::random_metric(3, 5, 43);
  const auto rmd = MetricData::build(rm);
  std::vector<Jet> ru;
  for (int j = 0; j < 3; ++j) ru.push_back(testsupport::rj(rm.space, 430 + static_cast<uint64_t>(j)));
  const Jet p = testsupport::rj(rm.space, 44);
  const JetMatrix sigma = stress_upper(rmd, ru, p);
  Jet lhs = Jet::zero(rm.space);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) lhs = lhs + sigma.at(j, k) * rmd.g_lower.at(j, k);
  const Jet rhs = rm.mu * strain_mixed(rmd, ru).trace() - 3.0 * p;
  CHECK(max_abs_diff(lhs, rhs, 3) / std::max(1.0, rhs.max_abs(3)) < 1e-12);
}

TEST_CASE("divergence of the stress tensor") {
  const auto m = flat(2, 5);
  const auto md = MetricData::build(m);
  const Jet x1 = Jet::variable(m.space, 0);
  const Jet x2 = Jet::variable(m.space, 1);

  const auto r1 = div_stress(md, {Jet::zero(m.space), Jet::zero(m.space)}, x1);
  CHECK(std::abs(r1[0].value() - Complex(-1.0)) < 1e-15);
  CHECK(r1[1].max_abs() < 1e-15);

  const auto r2 = div_stress(md, {x2 * x2, Jet::zero(m.space)}, Jet::zero(m.space));
  CHECK(std::abs(r2[0].value() - Complex(2.0)) < 1e-15);
  CHECK(r2[1].max_abs() < 1e-15);

  // flat metric, constant mu, solenoidal u (stream function): the classical
  // Stokes operator div sigma = mu Lap u - grad p, componentwise
  const auto mf = flat(3, 6, 1.7);
  const auto mdf = MetricData::build(mf);
  const Jet phi = testsupport::rj(mf.space, 50);
  const std::vector<Jet> u{partial(phi, 1), -1.0 * partial(phi, 0), Jet::zero(mf.space, phi.order() - 1)};
  CHECK(divergence(mdf, u).max_abs(4) < 1e-14);
  const Jet p = testsupport::rj(mf.space, 51).truncated(phi.order() - 1);
  const auto ds = div_stress(mdf, u, p);
  for (int j = 0; j < 3; ++j) {
    Jet lap = Jet::zero(mf.space);
    for (int k = 0; k < 3; ++k) lap = lap + partial(partial(u[static_cast<size_t>(j)], k), k);
    const Jet expect = mf.mu * lap - partial(p, j);
    CHECK(max_abs_diff(ds[static_cast<size_t>(j)], expect, 3) / std::max(1.0, expect.max_abs(3)) < 1e-11);
  }
}

TEST_CASE("velocity-pressure transform") {
  const auto m = flat(2, 5);
  const auto md = MetricData::build(m);
  std::vector<Jet> w{testsupport::rj(m.space, 61), testsupport::rj(m.space, 62)};
  const Jet f = testsupport::rj(m.space, 63);

  // with unit viscosity the transform collapses to u = w + grad f
  const FluidState fs = transform(md, w, f);
  for (int j = 0; j < 2; ++j) {
    const Jet expect = w[static_cast<size_t>(j)] + gradient(md, f)[static_cast<size_t>(j)];
    CHECK(max_abs_diff(fs.u[static_cast<size_t>(j)], expect, 4) < 1e-13);
  }
  const Jet p_expect = divergence(md, w) + 2.0 * laplace_beltrami(md, f);
  CHECK(max_abs_diff(fs.p, p_expect, 3) < 1e-13);

  const FluidState still = transform(md, {Jet::zero(m.space), Jet::zero(m.space)}, Jet::constant(m.space, 2.0));
  for (const auto& c : still.u) CHECK(c.max_abs() < 1e-15);
  CHECK(still.p.max_abs() < 1e-15);
}

TEST_CASE("divergence identity for the transformed velocity") {
  for (uint64_t seed : {7u, 8u}) {
    const auto m = testsupport::random_metric(3, 6, seed);
    const auto md = MetricData::build(m);
    std::vector<Jet> w;
    for (int j = 0; j < 3; ++j) w.push_back(testsupport::rj(m.space, seed * 100 + static_cast<uint64_t>(j)));
    const Jet f = testsupport::rj(m.space, seed * 100 + 50);
    const FluidState fs = transform(md, w, f);

    const Jet lhs = divergence(md, fs.u);
    // independent expansion: mu^{-1/2} div w + g(grad mu^{-1/2}, w)
    //                        + mu^{-1} lap f - f lap mu^{-1}
    const Jet mu_inv = reciprocal(m.mu);
    const Jet mu_is = reciprocal(sqrt(m.mu));
    Jet pairing = Jet::zero(m.space);
    for (int k = 0; k < 3; ++k) pairing = pairing + partial(mu_is, k) * w[static_cast<size_t>(k)];
    const Jet rhs = mu_is * divergence(md, w) + pairing + mu_inv * laplace_beltrami(md, f) -
                    f * laplace_beltrami(md, mu_inv);
    CHECK(max_abs_diff(lhs, rhs, 3) / std::max(1.0, rhs.max_abs(3)) < 1e-10);
  }
}

TEST_CASE("assemble: flat system layout") {
  const auto m = flat(3, 4);
  const auto sys = assemble(m);
  const int n = 3;
  const MultiIndex id0(m.space->vars());

  // B carries only the bottom-left unit entry
  for (int r = 0; r <= n; ++r)
    for (int c = 0; c <= n; ++c) {
      double mag = 0.0;
      for (const auto& [beta, coeff] : sys.b.at(r, c).terms) mag = std::max(mag, coeff.max_abs());
      if (r == n && c == n - 1)
        CHECK(std::abs(sys.b.at(r, c).terms.at(id0).value() - Complex(1.0)) < 1e-15);
      else
        CHECK(mag < 1e-15);
    }

  // C1's only nonzero block is the bottom-left tangential gradient row
  for (int c = 0; c < n - 1; ++c) {
    const auto& op = sys.c1.at(n, c);
    CHECK(op.terms.size() == 1);
    CHECK(std::abs(op.terms.at(MultiIndex::unit(m.space->vars(), c)).value() - Complex(1.0)) < 1e-15);
  }
  for (int r = 0; r <= n; ++r)
    for (int c = 0; c <= n; ++c) {
      if (r == n && c < n - 1) continue;
      for (const auto& [beta, coeff] : sys.c1.at(r, c).terms) CHECK(coeff.max_abs() < 1e-15);
    }

  // C0 vanishes entirely
  for (int r = 0; r <= n; ++r)
    for (int c = 0; c <= n; ++c)
      for (const auto& [beta, coeff] : sys.c0.at(r, c).terms) CHECK(coeff.max_abs() < 1e-15);
}

TEST_CASE("assemble: A block and C2 shape") {
  const auto m = flat(2, 4, 4.0);
  const auto sys = assemble(m);
  const MultiIndex id0(m.space->vars());
  CHECK(std::abs(sys.a.at(0, 0).terms.at(id0).value() - Complex(2.0)) < 1e-15);
  CHECK(std::abs(sys.a.at(1, 1).terms.at(id0).value() - Complex(2.0)) < 1e-15);
  CHECK(std::abs(sys.a.at(2, 2).terms.at(id0).value() - Complex(0.25)) < 1e-15);
  CHECK(sys.a.at(0, 1).is_zero());

  // C2 = (g^{ab} d_a d_b) I for any metric
  const auto rm = testsupport::random_metric(3, 5, 71);
  const auto rsys = assemble(rm);
  for (int r = 0; r <= 3; ++r)
    for (int c = 0; c <= 3; ++c) {
      if (r != c) {
        CHECK(rsys.c2.at(r, c).is_zero());
        continue;
      }
      for (const auto& [beta, coeff] : rsys.c2.at(r, c).terms) {
        CHECK(beta.degree() == 2);
        CHECK(beta[rm.space->var_normal()] == 0);
        int a = -1, b = -1;
        for (int v = 0; v < rm.space->vars(); ++v)
          for (int e = 0; e < beta[v]; ++e) (a < 0 ? a : b) = v;
        const Jet expect = (a == b ? 1.0 : 2.0) * rm.g_upper.at(a, b);
        CHECK(max_abs_diff(coeff, expect, 5) < 1e-14);
      }
    }
}

TEST_CASE("apply_system on closed-form inputs") {
  const auto m = flat(2, 5);
  const auto sys = assemble(m);
  const Jet zero = Jet::zero(m.space);

  const auto all_zero = apply_system(sys, {zero, zero}, zero);
  for (const auto& c : all_zero) CHECK(c.max_abs() == 0.0);

  const auto r = apply_system(sys, {zero, zero}, Jet::variable(m.space, 0));
  for (const auto& c : r) CHECK(c.max_abs() < 1e-15);
}

TEST_CASE("transformation identity certifies the assembled system") {
  // exact identity on the flat case
  {
    const auto m = flat(2, 6);
    const auto md = MetricData::build(m);
    std::vector<Jet> w{testsupport::rj(m.space, 81), testsupport::rj(m.space, 82)};
    const Jet f = testsupport::rj(m.space, 83);
    const TransformCheck chk = verify_transformation(md, w, f);
    CHECK(chk.rel_residual < 1e-12);
  }
  // random metric and viscosity, n = 2 and n = 3
  for (int n : {2, 3}) {
    for (uint64_t seed : {1u, 2u, 3u}) {
      const RandomScenario sc = make_random_scenario(n, 6, seed);
      const auto md = MetricData::build(sc.metric);
      const TransformCheck chk = verify_transformation(md, sc.w, sc.f);
      CHECK(chk.rel_residual < 1e-10);
      CHECK(chk.compared_order >= 2);
    }
  }
}

TEST_CASE("corrupting an entry breaks the transformation identity") {
  // fields with every derivative slot populated at unit size, so a fault in
  // any operator entry shows up at its own magnitude
  const auto m = testsupport::random_metric(2, 5, 4, 0.1);
  const auto md = MetricData::build(m);
  std::vector<Jet> w;
  Jet ones = Jet::constant(m.space, 1.0);
  for (int v = 0; v < 2; ++v) ones = ones + Jet::variable(m.space, v);
  for (int j = 0; j < 2; ++j) w.push_back(ones + 0.3 * testsupport::rj(m.space, 400 + static_cast<uint64_t>(j)));
  const Jet f = ones + 0.3 * testsupport::rj(m.space, 405);

  SystemMatrices sys = assemble(md);
  mutate_entry(&sys, "C0:0,1", 1e-3);
  const TransformCheck chk = verify_transformation(md, sys, w, f);
  CHECK(chk.abs_residual >= 1e-4);
  CHECK(chk.rel_residual > 1e-8);  // loud against the 1e-10 identity tolerance
}

TEST_CASE("ricci commutation identities") {
  const auto m = testsupport::random_metric(3, 6, 91);
  const auto md = MetricData::build(m);
  const int n = 3;
  std::vector<Jet> w;
  for (int j = 0; j < n; ++j) w.push_back(testsupport::rj(m.space, 910 + static_cast<uint64_t>(j)));

  // nabla^k nabla^j w_k - grad^j div w = Ric(w)^j
  std::vector<Jet> w_low;
  for (int k = 0; k < n; ++k) {
    Jet acc = Jet::zero(m.space);
    for (int l = 0; l < n; ++l) acc = acc + md.g_lower.at(k, l) * w[static_cast<size_t>(l)];
    w_low.push_back(acc);
  }
  const JetMatrix a = testsupport::covd_covector(md, w_low);    // A_{b k}
  const auto dda = testsupport::covd_tensor02(md, a);           // [a](b,k)
  for (int j = 0; j < n; ++j) {
    Jet lhs = Jet::zero(m.space);
    for (int aa = 0; aa < n; ++aa)
      for (int b = 0; b < n; ++b)
        for (int k = 0; k < n; ++k) {
          // g^{ka} g^{jb} nabla_a nabla_b w_k
          lhs = lhs + m.g_upper.at(k, aa) * (m.g_upper.at(j, b) * dda[static_cast<size_t>(aa)].at(b, k));
        }
    const Jet divw = divergence(md, w);
    Jet rhs = Jet::zero(m.space);
    for (int k = 0; k < n; ++k) rhs = rhs + m.g_upper.at(j, k) * partial(divw, k);
    // grad^j div w uses the plain derivative of a scalar
    for (int k = 0; k < n; ++k) rhs = rhs + md.ric.upper.at(j, k) * w_low[static_cast<size_t>(k)];
    CHECK(max_abs_diff(lhs, rhs, 3) / std::max(1.0, rhs.max_abs(3)) < 1e-10);
  }

  // scalar analogue with w = grad f
  const Jet f = testsupport::rj(m.space, 97);
  std::vector<Jet> df;
  for (int k = 0; k < n; ++k) df.push_back(partial(f, k));
  const JetMatrix af = testsupport::covd_covector(md, df);
  const auto ddaf = testsupport::covd_tensor02(md, af);
  for (int j = 0; j < n; ++j) {
    Jet lhs = Jet::zero(m.space);
    for (int aa = 0; aa < n; ++aa)
      for (int b = 0; b < n; ++b)
        for (int k = 0; k < n; ++k)
          lhs = lhs + m.g_upper.at(k, aa) * (m.g_upper.at(j, b) * ddaf[static_cast<size_t>(aa)].at(b, k));
    const Jet lap = laplace_beltrami(md, f);
    Jet rhs = Jet::zero(m.space);
    for (int k = 0; k < n; ++k)
      rhs = rhs + m.g_upper.at(j, k) * partial(lap, k) + md.ric.upper.at(j, k) * partial(f, k);
    CHECK(max_abs_diff(lhs, rhs, 2) / std::max(1.0, rhs.max_abs(2)) < 1e-10);
  }
}

TEST_CASE("bochner laplacian identity") {
  const auto m = testsupport::random_metric(3, 6, 101);
  const auto md = MetricData::build(m);
  const int n = 3;
  std::vector<Jet> w;
  for (int j = 0; j < n; ++j) w.push_back(testsupport::rj(m.space, 1010 + static_cast<uint64_t>(j)));

  const JetMatrix dw = covariant_derivative_vector(md, w);  // T^j_k
  const auto ddw = testsupport::covd_tensor11(md, dw);      // [a](j,k) = nabla_a T^j_k
  for (int j = 0; j < n; ++j) {
    // rough laplacian nabla^k nabla_k w^j
    Jet lhs = Jet::zero(m.space);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) lhs = lhs + m.g_upper.at(k, l) * ddw[static_cast<size_t>(l)].at(j, k);

    Jet rhs = laplace_beltrami(md, w[static_cast<size_t>(j)]);
    for (int k = 0; k < n; ++k) {
      Jet ric_w = md.ric.upper.at(j, k);
      Jet w_low = Jet::zero(m.space);
      for (int l = 0; l < n; ++l) w_low = w_low + md.g_lower.at(k, l) * w[static_cast<size_t>(l)];
      rhs = rhs - ric_w * w_low;
    }
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        for (int mm = 0; mm < n; ++mm) {
          rhs = rhs + m.g_upper.at(k, l) *
                          (2.0 * (md.gamma.at(j, mm, k) * partial(w[static_cast<size_t>(mm)], l)) +
                           partial(md.gamma.at(j, k, l), mm) * w[static_cast<size_t>(mm)]);
        }
      }
    CHECK(max_abs_diff(lhs, rhs, 3) / std::max(1.0, rhs.max_abs(3)) < 1e-10);
  }
}
