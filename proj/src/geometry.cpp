#include "stokesdtn/geometry.hpp"

#include <cmath>

#include "stokesdtn/errors.hpp"

namespace stokesdtn {

BoundaryNormalMetric BoundaryNormalMetric::make(std::shared_ptr<const JetSpace> space,
                                                const JetMatrix& tangential_upper, Jet mu) {
  BoundaryNormalMetric m;
  m.n = space->num_x();
  m.space = space;
  m.mu = std::move(mu);
  const int nt = m.n - 1;
  if (tangential_upper.rows() != nt || tangential_upper.cols() != nt)
    throw UsageError("BoundaryNormalMetric: tangential block must be (n-1)x(n-1)");
  m.g_upper = JetMatrix(space, m.n, m.n);
  for (int a = 0; a < nt; ++a)
    for (int b = 0; b < nt; ++b) m.g_upper.at(a, b) = tangential_upper.at(a, b);
  m.g_upper.at(m.n - 1, m.n - 1) = Jet::constant(space, 1.0);
  m.validate();
  return m;
}

void BoundaryNormalMetric::validate() const {
  if (n < 2) throw UsageError("BoundaryNormalMetric: n >= 2 required");
  if (space->num_xi() != 0) throw UsageError("BoundaryNormalMetric: metric jets live in the x-only space");
  for (int a = 0; a < n - 1; ++a) {
    if (!g_upper.at(a, n - 1).is_strictly_zero() || !g_upper.at(n - 1, a).is_strictly_zero())
      throw UsageError("BoundaryNormalMetric: mixed normal entries must vanish");
  }
  const Jet corner = g_upper.at(n - 1, n - 1) - Jet::constant(space, 1.0);
  if (!corner.is_strictly_zero()) throw UsageError("BoundaryNormalMetric: normal-normal entry must be 1");
  for (int a = 0; a < n - 1; ++a)
    for (int b = a + 1; b < n - 1; ++b)
      if (max_abs_diff(g_upper.at(a, b), g_upper.at(b, a), space->max_order()) != 0.0)
        throw UsageError("BoundaryNormalMetric: inverse metric must be symmetric");
  // positive definiteness of the base values, via leading principal minors
  const int nt = n - 1;
  std::vector<double> a(static_cast<size_t>(nt) * static_cast<size_t>(nt));
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nt; ++j) {
      const Complex v = g_upper.at(i, j).value();
      if (std::abs(v.imag()) > 1e-9 * std::max(1.0, std::abs(v.real())))
        throw SingularInputError("BoundaryNormalMetric: base metric must be real");
      a[static_cast<size_t>(i) * static_cast<size_t>(nt) + static_cast<size_t>(j)] = v.real();
    }
  // Cholesky-style elimination; failure of a pivot means not SPD.
  for (int c = 0; c < nt; ++c) {
    if (a[static_cast<size_t>(c) * static_cast<size_t>(nt) + static_cast<size_t>(c)] <= 0.0)
      throw SingularInputError("BoundaryNormalMetric: base metric is not positive definite");
    for (int r = c + 1; r < nt; ++r) {
      const double f = a[static_cast<size_t>(r) * static_cast<size_t>(nt) + static_cast<size_t>(c)] / a[static_cast<size_t>(c) * static_cast<size_t>(nt) + static_cast<size_t>(c)];
      for (int k = c; k < nt; ++k)
        a[static_cast<size_t>(r) * static_cast<size_t>(nt) + static_cast<size_t>(k)] -= f * a[static_cast<size_t>(c) * static_cast<size_t>(nt) + static_cast<size_t>(k)];
    }
  }
  const Complex mu0 = mu.value();
  if (!(mu0.real() > 0.0) || std::abs(mu0.imag()) > 1e-10 * mu0.real())
    throw SingularInputError("BoundaryNormalMetric: viscosity must be positive at the base point");
}

JetMatrix lower_metric(const BoundaryNormalMetric& m) { return inverse(m.g_upper); }

ChristoffelJets christoffel(const BoundaryNormalMetric& m, const JetMatrix& g_lower) {
  const int n = m.n;
  ChristoffelJets out;
  out.n = n;
  out.g.assign(static_cast<size_t>(n) * static_cast<size_t>(n) * static_cast<size_t>(n), Jet::zero(m.space, m.space->max_order() - 1));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = k; l < n; ++l) {
        Jet acc = Jet::zero(m.space);
        for (int mm = 0; mm < n; ++mm) {
          const Jet t = partial(g_lower.at(k, mm), l) + partial(g_lower.at(l, mm), k) - partial(g_lower.at(k, l), mm);
          acc = acc + m.g_upper.at(j, mm) * t;
        }
        out.at(j, k, l) = 0.5 * acc;
        out.at(j, l, k) = out.at(j, k, l);
      }
  return out;
}

RicciJets ricci(const BoundaryNormalMetric& m, const ChristoffelJets& gamma) {
  const int n = m.n;
  if (m.space->max_order() < 2) throw OrderExhaustedError("ricci: jet order >= 2 required");
  RicciJets out;
  out.lower = JetMatrix(m.space, n, n);
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) {
      Jet acc = Jet::zero(m.space);
      for (int j = 0; j < n; ++j) {
        acc = acc + partial(gamma.at(j, k, l), j) - partial(gamma.at(j, j, l), k);
        for (int mm = 0; mm < n; ++mm)
          acc = acc + gamma.at(j, j, mm) * gamma.at(mm, k, l) - gamma.at(j, k, mm) * gamma.at(mm, j, l);
      }
      out.lower.at(k, l) = acc;
      out.lower.at(l, k) = acc;
    }
  out.upper = m.g_upper * out.lower * m.g_upper;
  return out;
}

MetricData MetricData::build(const BoundaryNormalMetric& m) {
  MetricData md;
  md.metric = m;
  md.g_lower = lower_metric(m);
  md.gamma = christoffel(m, md.g_lower);
  md.ric = ricci(m, md.gamma);
  return md;
}

std::vector<Jet> gradient(const MetricData& md, const Jet& f) {
  const int n = md.metric.n;
  std::vector<Jet> out;
  out.reserve(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    Jet acc = md.metric.g_upper.at(j, 0) * partial(f, 0);
    for (int k = 1; k < n; ++k) acc = acc + md.metric.g_upper.at(j, k) * partial(f, k);
    out.push_back(acc);
  }
  return out;
}

Jet divergence(const MetricData& md, const std::vector<Jet>& w) {
  const int n = md.metric.n;
  Jet acc = partial(w[0], 0);
  for (int k = 1; k < n; ++k) acc = acc + partial(w[static_cast<size_t>(k)], k);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) acc = acc + md.gamma.at(k, k, l) * w[static_cast<size_t>(l)];
  return acc;
}

Jet laplace_beltrami(const MetricData& md, const Jet& f) {
  // normal coordinates: d_n^2 + Gamma^a_an d_n + g^ab d_a d_b
  //                     + (g^ab Gamma^c_ca + d_a g^ab) d_b
  const int n = md.metric.n;
  const int nrm = n - 1;
  Jet acc = partial(partial(f, nrm), nrm);
  for (int a = 0; a < n - 1; ++a) acc = acc + md.gamma.at(a, a, nrm) * partial(f, nrm);
  for (int a = 0; a < n - 1; ++a)
    for (int b = 0; b < n - 1; ++b) acc = acc + md.metric.g_upper.at(a, b) * partial(partial(f, a), b);
  for (int b = 0; b < n - 1; ++b) {
    Jet coef = Jet::zero(md.metric.space);
    for (int a = 0; a < n - 1; ++a) {
      Jet contracted = Jet::zero(md.metric.space);
      for (int c = 0; c < n - 1; ++c) contracted = contracted + md.gamma.at(c, c, a);
      coef = coef + md.metric.g_upper.at(a, b) * contracted + partial(md.metric.g_upper.at(a, b), a);
    }
    acc = acc + coef * partial(f, b);
  }
  return acc;
}

JetMatrix scalar_hessian(const MetricData& md, const Jet& f) {
  const int n = md.metric.n;
  JetMatrix lower(md.metric.space, n, n);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k) {
      Jet acc = partial(partial(f, l), k);
      for (int mm = 0; mm < n; ++mm) acc = acc - md.gamma.at(mm, l, k) * partial(f, mm);
      lower.at(l, k) = acc;
    }
  return md.metric.g_upper * lower;
}

JetMatrix covariant_derivative_vector(const MetricData& md, const std::vector<Jet>& w) {
  const int n = md.metric.n;
  JetMatrix out(md.metric.space, n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      Jet acc = partial(w[static_cast<size_t>(j)], k);
      for (int l = 0; l < n; ++l) acc = acc + md.gamma.at(j, k, l) * w[static_cast<size_t>(l)];
      out.at(j, k) = acc;
    }
  return out;
}

Jet laplace_beltrami(const BoundaryNormalMetric& m, const Jet& f) {
  return laplace_beltrami(MetricData::build(m), f);
}
Jet divergence(const BoundaryNormalMetric& m, const std::vector<Jet>& w) {
  return divergence(MetricData::build(m), w);
}
JetMatrix scalar_hessian(const BoundaryNormalMetric& m, const Jet& f) {
  return scalar_hessian(MetricData::build(m), f);
}
JetMatrix covariant_derivative_vector(const BoundaryNormalMetric& m, const std::vector<Jet>& w) {
  return covariant_derivative_vector(MetricData::build(m), w);
}

}  // namespace stokesdtn
