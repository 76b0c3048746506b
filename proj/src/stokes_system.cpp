#include "stokesdtn/stokes_system.hpp"

#include <algorithm>
#include <cmath>

namespace stokesdtn {

void DiffOp::add(const MultiIndex& beta, const Jet& coeff) {
  if (coeff.is_strictly_zero()) return;
  auto it = terms.find(beta);
  if (it == terms.end())
    terms.emplace(beta, coeff);
  else
    it->second = it->second + coeff;
}

Jet DiffOp::apply(const Jet& f) const {
  Jet acc = Jet::zero(space, f.order());
  for (const auto& [beta, coeff] : terms) {
    Jet df = f;
    for (int v = 0; v < beta.nvars(); ++v)
      for (int e = 0; e < beta[v]; ++e) df = partial(df, v);
    acc = acc + coeff * df;
  }
  return acc;
}

OpMatrix::OpMatrix(std::shared_ptr<const JetSpace> sp, int d) : dim(d) {
  ops.assign(static_cast<size_t>(d) * static_cast<size_t>(d), DiffOp{sp, {}});
}

std::vector<Jet> OpMatrix::apply(const std::vector<Jet>& u) const {
  std::vector<Jet> out;
  out.reserve(static_cast<size_t>(dim));
  for (int r = 0; r < dim; ++r) {
    Jet acc = Jet::zero(ops[0].space, u[0].order());
    for (int c = 0; c < dim; ++c)
      if (!at(r, c).is_zero()) acc = acc + at(r, c).apply(u[static_cast<size_t>(c)]);
    out.push_back(acc);
  }
  return out;
}

namespace {

// nabla^k S^j_k for a (1,1)-tensor field, used for the C0 entry
// -2 mu^{-1/2} [nabla^k (mu nabla^j nabla_k mu^{-1})].
std::vector<Jet> div_tensor11(const MetricData& md, const JetMatrix& s) {
  const int n = md.metric.n;
  std::vector<Jet> out;
  out.reserve(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    Jet acc = Jet::zero(md.metric.space);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        Jet cov = partial(s.at(j, k), l);
        for (int mm = 0; mm < n; ++mm)
          cov = cov + md.gamma.at(j, l, mm) * s.at(mm, k) - md.gamma.at(mm, l, k) * s.at(j, mm);
        acc = acc + md.metric.g_upper.at(k, l) * cov;
      }
    out.push_back(acc);
  }
  return out;
}

}  // namespace

SystemMatrices assemble(const BoundaryNormalMetric& m) { return assemble(MetricData::build(m)); }

SystemMatrices assemble(const MetricData& md) {
  const int n = md.metric.n;
  const auto sp = md.metric.space;
  if (sp->max_order() < 3) throw OrderExhaustedError("assemble: jet order >= 3 required");
  const int N = n + 1;
  const int nrm = n - 1;  // normal coordinate index

  SystemMatrices sys;
  sys.n = n;
  sys.space = sp;
  sys.a = OpMatrix(sp, N);
  sys.b = OpMatrix(sp, N);
  sys.c2 = OpMatrix(sp, N);
  sys.c1 = OpMatrix(sp, N);
  sys.c0 = OpMatrix(sp, N);

  const MultiIndex id0(sp->vars());

  const Jet mu = md.metric.mu;
  const Jet mu_sqrt = sqrt(mu);
  const Jet mu_inv = reciprocal(mu);
  const Jet mu_inv_sqrt = reciprocal(mu_sqrt);
  const auto grad_mu_sqrt = gradient(md, mu_sqrt);            // (grad mu^1/2)^j
  const JetMatrix hess_mu_inv = scalar_hessian(md, mu_inv);   // nabla^j nabla_k mu^-1
  const JetMatrix hess_mu_inv_up = hess_mu_inv * md.metric.g_upper;  // nabla^j nabla^k mu^-1
  const JetMatrix hess_mu_sqrt = scalar_hessian(md, mu_sqrt);
  const Jet lap_mu_sqrt = laplace_beltrami(md, mu_sqrt);
  const Jet lap_mu_inv = laplace_beltrami(md, mu_inv);

  Jet gamma_tan_n = Jet::zero(sp);  // Gamma^a_{a n}, tangential contraction
  for (int a = 0; a < n - 1; ++a) gamma_tan_n = gamma_tan_n + md.gamma.at(a, a, nrm);

  // ---- A = diag(mu^1/2 I_n, mu^-1)
  for (int j = 0; j < n; ++j) sys.a.at(j, j).add(id0, mu_sqrt);
  sys.a.at(n, n).add(id0, mu_inv);

  // ---- B (multiplication matrix)
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      Jet e = 2.0 * md.gamma.at(j, k, nrm);
      if (k == nrm) e = e - 2.0 * (mu_inv_sqrt * grad_mu_sqrt[static_cast<size_t>(j)]);
      if (j == k) e = e + gamma_tan_n;
      sys.b.at(j, k).add(id0, e);
    }
    sys.b.at(j, n).add(id0, 2.0 * (mu_inv_sqrt * (md.ric.upper.at(j, nrm) - mu * hess_mu_inv_up.at(j, nrm))));
  }
  sys.b.at(n, nrm).add(id0, mu_sqrt);
  sys.b.at(n, n).add(id0, gamma_tan_n);

  // ---- C2 = (g^{ab} d_a d_b) I
  for (int r = 0; r < N; ++r)
    for (int a = 0; a < n - 1; ++a)
      for (int b = a; b < n - 1; ++b) {
        MultiIndex beta = MultiIndex::unit(sp->vars(), a);
        beta.set(b, beta[b] + 1);
        const Jet coeff = (a == b) ? md.metric.g_upper.at(a, b) : 2.0 * md.metric.g_upper.at(a, b);
        sys.c2.at(r, r).add(beta, coeff);
      }

  // ---- C1
  // scalar part (g^{ab} Gamma^c_{ca} + d_a g^{ab}) d_b on every component
  for (int b = 0; b < n - 1; ++b) {
    Jet coeff = Jet::zero(sp);
    for (int a = 0; a < n - 1; ++a) {
      Jet contracted = Jet::zero(sp);
      for (int c = 0; c < n - 1; ++c) contracted = contracted + md.gamma.at(c, c, a);
      coeff = coeff + md.metric.g_upper.at(a, b) * contracted + partial(md.metric.g_upper.at(a, b), a);
    }
    const MultiIndex beta = MultiIndex::unit(sp->vars(), b);
    for (int r = 0; r < N; ++r) sys.c1.at(r, r).add(beta, coeff);
  }
  for (int j = 0; j < n; ++j) {
    // 2 [g^{ab} Gamma^j_{ka} d_b]
    for (int k = 0; k < n; ++k)
      for (int b = 0; b < n - 1; ++b) {
        Jet coeff = Jet::zero(sp);
        for (int a = 0; a < n - 1; ++a) coeff = coeff + md.metric.g_upper.at(a, b) * md.gamma.at(j, k, a);
        sys.c1.at(j, k).add(MultiIndex::unit(sp->vars(), b), 2.0 * coeff);
      }
    // 2 mu^{-1/2} [(R^{ja} - mu nabla^j nabla^a mu^{-1}) d_a]
    for (int a = 0; a < n - 1; ++a)
      sys.c1.at(j, n).add(MultiIndex::unit(sp->vars(), a),
                          2.0 * (mu_inv_sqrt * (md.ric.upper.at(j, a) - mu * hess_mu_inv_up.at(j, a))));
    // -2 mu^{-1/2} [(grad^j mu^{1/2}) (d_k - delta_nk d_n)]; the k = n entry cancels
    for (int k = 0; k < n - 1; ++k)
      sys.c1.at(j, k).add(MultiIndex::unit(sp->vars(), k),
                          -2.0 * (mu_inv_sqrt * grad_mu_sqrt[static_cast<size_t>(j)]));
  }
  // bottom row mu^{1/2} [d_k - delta_nk d_n]
  for (int k = 0; k < n - 1; ++k) sys.c1.at(n, k).add(MultiIndex::unit(sp->vars(), k), mu_sqrt);

  // ---- C0 (multiplication matrix)
  JetMatrix s_t(sp, n, n);  // S^j_k = mu nabla^j nabla_k mu^{-1}
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) s_t.at(j, k) = mu * hess_mu_inv.at(j, k);
  const auto div_s = div_tensor11(md, s_t);

  std::vector<Jet> gamma_llk;  // Gamma^l_{lk}, full Roman contraction
  gamma_llk.reserve(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    Jet acc = Jet::zero(sp);
    for (int l = 0; l < n; ++l) acc = acc + md.gamma.at(l, l, k);
    gamma_llk.push_back(acc);
  }

  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      Jet e = Jet::zero(sp);
      // [g^{ml} d_k Gamma^j_{ml}]
      for (int mm = 0; mm < n; ++mm)
        for (int l = 0; l < n; ++l) e = e + md.metric.g_upper.at(mm, l) * partial(md.gamma.at(j, mm, l), k);
      if (j == k) e = e - mu_inv_sqrt * lap_mu_sqrt;
      e = e - 2.0 * (mu_inv_sqrt * grad_mu_sqrt[static_cast<size_t>(j)] * gamma_llk[static_cast<size_t>(k)]);
      e = e - 2.0 * (mu_inv_sqrt * hess_mu_sqrt.at(j, k));
      sys.c0.at(j, k).add(id0, e);
    }
    sys.c0.at(j, n).add(id0, -2.0 * (mu_inv_sqrt * div_s[static_cast<size_t>(j)]));
  }
  for (int k = 0; k < n; ++k)
    sys.c0.at(n, k).add(id0, mu_sqrt * gamma_llk[static_cast<size_t>(k)] + mu * partial(mu_inv_sqrt, k));
  sys.c0.at(n, n).add(id0, -(mu * lap_mu_inv));

  return sys;
}

std::vector<Jet> apply_system(const SystemMatrices& mats, const std::vector<Jet>& w, const Jet& f) {
  const int n = mats.n;
  const int nrm = n - 1;
  std::vector<Jet> u = w;
  u.push_back(f);
  std::vector<Jet> up, upp;
  up.reserve(u.size());
  upp.reserve(u.size());
  for (const auto& q : u) {
    up.push_back(partial(q, nrm));
    upp.push_back(partial(partial(q, nrm), nrm));
  }
  const auto bu = mats.b.apply(up);
  const auto c2u = mats.c2.apply(u);
  const auto c1u = mats.c1.apply(u);
  const auto c0u = mats.c0.apply(u);
  std::vector<Jet> inner;
  inner.reserve(u.size());
  for (size_t r = 0; r < u.size(); ++r)
    inner.push_back(upp[r] + bu[r] + c2u[r] + c1u[r] + c0u[r]);
  return mats.a.apply(inner);
}

FluidState transform(const MetricData& md, const std::vector<Jet>& w, const Jet& f) {
  const int n = md.metric.n;
  FluidState fs;
  fs.w = w;
  fs.f = f;
  const Jet mu = md.metric.mu;
  const Jet mu_sqrt = sqrt(mu);
  const Jet mu_inv = reciprocal(mu);
  const Jet mu_inv_sqrt = reciprocal(mu_sqrt);
  const auto grad_f = gradient(md, f);
  const auto grad_mu_inv = gradient(md, mu_inv);
  fs.u.reserve(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j)
    fs.u.push_back(mu_inv_sqrt * w[static_cast<size_t>(j)] + mu_inv * grad_f[static_cast<size_t>(j)] -
                   f * grad_mu_inv[static_cast<size_t>(j)]);
  std::vector<Jet> scaled_w;
  scaled_w.reserve(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) scaled_w.push_back(mu_sqrt * w[static_cast<size_t>(j)]);
  fs.p = divergence(md, scaled_w) + 2.0 * laplace_beltrami(md, f);
  return fs;
}

FluidState transform(const BoundaryNormalMetric& m, const std::vector<Jet>& w, const Jet& f) {
  return transform(MetricData::build(m), w, f);
}

JetMatrix strain_mixed(const MetricData& md, const std::vector<Jet>& u) {
  const int n = md.metric.n;
  // u_k = g_kl u^l
  std::vector<Jet> u_low;
  u_low.reserve(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    Jet acc = md.g_lower.at(k, 0) * u[0];
    for (int l = 1; l < n; ++l) acc = acc + md.g_lower.at(k, l) * u[static_cast<size_t>(l)];
    u_low.push_back(acc);
  }
  const JetMatrix cov_up = covariant_derivative_vector(md, u);  // nabla_k u^j at (j,k)
  JetMatrix out(md.metric.space, n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      // grad^j u_k = g^{jl} (d_l u_k - Gamma^m_{lk} u_m)
      Jet acc = Jet::zero(md.metric.space);
      for (int l = 0; l < n; ++l) {
        Jet cov = partial(u_low[static_cast<size_t>(k)], l);
        for (int mm = 0; mm < n; ++mm) cov = cov - md.gamma.at(mm, l, k) * u_low[static_cast<size_t>(mm)];
        acc = acc + md.metric.g_upper.at(j, l) * cov;
      }
      out.at(j, k) = acc + cov_up.at(j, k);
    }
  return out;
}

JetMatrix strain_upper(const MetricData& md, const std::vector<Jet>& u) {
  return strain_mixed(md, u) * md.metric.g_upper;
}

JetMatrix stress_upper(const MetricData& md, const std::vector<Jet>& u, const Jet& p) {
  const int n = md.metric.n;
  JetMatrix out = strain_upper(md, u);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) out.at(j, k) = md.metric.mu * out.at(j, k) - p * md.metric.g_upper.at(j, k);
  return out;
}

std::vector<Jet> div_stress(const MetricData& md, const std::vector<Jet>& u, const Jet& p) {
  const int n = md.metric.n;
  const JetMatrix sigma = stress_upper(md, u, p);
  std::vector<Jet> out;
  out.reserve(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    Jet acc = Jet::zero(md.metric.space);
    for (int k = 0; k < n; ++k) {
      acc = acc + partial(sigma.at(j, k), k);
      for (int mm = 0; mm < n; ++mm)
        acc = acc + md.gamma.at(j, k, mm) * sigma.at(mm, k) + md.gamma.at(k, k, mm) * sigma.at(j, mm);
    }
    out.push_back(acc);
  }
  return out;
}

std::vector<Jet> div_stress(const BoundaryNormalMetric& m, const std::vector<Jet>& u, const Jet& p) {
  return div_stress(MetricData::build(m), u, p);
}

TransformCheck verify_transformation(const MetricData& md, const SystemMatrices& mats,
                                     const std::vector<Jet>& w, const Jet& f) {
  if (md.metric.space->max_order() < 4)
    throw OrderExhaustedError("verify_transformation: jet order >= 4 required");
  const auto lhs = apply_system(mats, w, f);
  const FluidState fs = transform(md, w, f);
  auto rhs = div_stress(md, fs.u, fs.p);
  rhs.push_back(divergence(md, fs.u));

  TransformCheck chk;
  int order = md.metric.space->max_order();
  for (size_t r = 0; r < rhs.size(); ++r) order = std::min({order, lhs[r].order(), rhs[r].order()});
  chk.compared_order = order;
  for (size_t r = 0; r < rhs.size(); ++r) {
    chk.abs_residual = std::max(chk.abs_residual, max_abs_diff(lhs[r], rhs[r], order));
    chk.scale = std::max(chk.scale, rhs[r].max_abs(order));
  }
  chk.rel_residual = chk.abs_residual / std::max(chk.scale, 1.0);
  return chk;
}

TransformCheck verify_transformation(const MetricData& md, const std::vector<Jet>& w, const Jet& f) {
  return verify_transformation(md, assemble(md), w, f);
}

TransformCheck verify_transformation(const BoundaryNormalMetric& m, const std::vector<Jet>& w, const Jet& f) {
  const MetricData md = MetricData::build(m);
  return verify_transformation(md, assemble(md), w, f);
}

void mutate_entry(SystemMatrices* mats, const std::string& entry_spec, double amount) {
  const auto colon = entry_spec.find(':');
  const auto comma = entry_spec.find(',', colon);
  if (colon == std::string::npos || comma == std::string::npos)
    throw UsageError("mutate: expected MATRIX:row,col, e.g. C0:1,2");
  const std::string name = entry_spec.substr(0, colon);
  const int r = std::stoi(entry_spec.substr(colon + 1, comma - colon - 1));
  const int c = std::stoi(entry_spec.substr(comma + 1));
  if (r < 0 || r > mats->n || c < 0 || c > mats->n) throw UsageError("mutate: entry out of range");
  OpMatrix* target = nullptr;
  bool first_order = false;
  if (name == "B")
    target = &mats->b;
  else if (name == "C0")
    target = &mats->c0;
  else if (name == "C1") {
    target = &mats->c1;
    first_order = true;
  } else if (name == "C2") {
    target = &mats->c2;
    first_order = true;
  } else
    throw UsageError("mutate: matrix must be one of B, C0, C1, C2");
  const auto sp = mats->space;
  const MultiIndex beta = first_order ? MultiIndex::unit(sp->vars(), 0) : MultiIndex(sp->vars());
  target->at(r, c).add(beta, Jet::constant(sp, amount));
}

}  // namespace stokesdtn
