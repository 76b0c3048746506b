#include "stokesdtn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace stokesdtn {

void ScenarioConfig::validate() const {
  if (n < 2) throw UsageError("config: n must be >= 2 (boundary determination needs a boundary)");
  if (n > 7) throw UsageError("config: n larger than 7 is not supported by the jet variable budget");
  if (depth < 0) throw UsageError("config: depth must be >= 0");
  if (tangential_order < 0) throw UsageError("config: tangential_order must be >= 0");
  if (jet_order > 0 && jet_order < depth + 2)
    throw UsageError("config: jet_order too small for depth " + std::to_string(depth) +
                     "; need jet_order >= " + std::to_string(depth + 2));
  if (metric.family != "flat" && metric.family != "conformal" && metric.family != "diagonal" &&
      metric.family != "random" && metric.family != "explicit")
    throw UsageError("config: metric.family must be flat|conformal|diagonal|random|explicit");
  if (mu.kind != "constant" && mu.kind != "poly" && mu.kind != "random")
    throw UsageError("config: mu.kind must be constant|poly|random");
  if (mu.kind == "constant" && !(mu.value > 0.0)) throw UsageError("config: mu.value must be positive");
  if (directions.mode != "minimal" && directions.mode != "oversampled")
    throw UsageError("config: directions.mode must be minimal|oversampled");
}

namespace {

std::vector<std::pair<MultiIndex, double>> poly_from_json(const Json& j, int nvars) {
  std::vector<std::pair<MultiIndex, double>> out;
  for (const auto& term : j) {
    if (!term.is_array() || term.size() != 2 || !term[0].is_array())
      throw UsageError("config: polynomial terms are [[exponents...], value]");
    if (static_cast<int>(term[0].size()) != nvars)
      throw UsageError("config: polynomial exponent list must have n entries");
    MultiIndex m(nvars);
    for (int v = 0; v < nvars; ++v) m.set(v, term[0][static_cast<size_t>(v)].get<int>());
    out.emplace_back(m, term[1].get<double>());
  }
  return out;
}

Jet jet_from_poly(const std::vector<std::pair<MultiIndex, double>>& poly,
                  const std::shared_ptr<const JetSpace>& sp) {
  Jet j = Jet::zero(sp);
  for (const auto& [m, v] : poly) {
    if (m.degree() > sp->max_order())
      throw UsageError("config: polynomial degree exceeds the jet order");
    j.set_coeff(m, j.coeff(m) + v);
  }
  return j;
}

}  // namespace

ScenarioConfig config_from_json(const Json& j) {
  ScenarioConfig cfg;
  static const std::vector<std::string> known{"schema",      "n",   "depth",      "jet_order",
                                              "tangential_order", "seed", "metric", "mu",
                                              "directions",  "tolerances", "out_dir"};
  for (const auto& [key, val] : j.items()) {
    (void)val;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw UsageError("config: unknown field '" + key + "'");
  }
  cfg.n = j.value("n", 2);
  cfg.depth = j.value("depth", 1);
  if (j.contains("jet_order")) {
    if (j["jet_order"].is_string()) {
      if (j["jet_order"].get<std::string>() != "auto")
        throw UsageError("config: jet_order must be an integer or \"auto\"");
      cfg.jet_order = 0;
    } else {
      cfg.jet_order = j["jet_order"].get<int>();
    }
  }
  cfg.tangential_order = j.value("tangential_order", 0);
  cfg.seed = j.value("seed", uint64_t{1});
  cfg.out_dir = j.value("out_dir", std::string("out"));
  if (j.contains("metric")) {
    const auto& m = j["metric"];
    cfg.metric.family = m.value("family", std::string("flat"));
    cfg.metric.scale = m.value("scale", 0.15);
    if (m.contains("seed")) cfg.metric.seed = m["seed"].get<uint64_t>();
    if (m.contains("factor")) cfg.metric.polys.push_back(poly_from_json(m["factor"], cfg.n));
    if (m.contains("entries"))
      for (const auto& e : m["entries"]) cfg.metric.polys.push_back(poly_from_json(e, cfg.n));
    if (m.contains("g_upper")) {
      for (const auto& row : m["g_upper"])
        for (const auto& e : row) cfg.metric.polys.push_back(poly_from_json(e, cfg.n));
    }
  }
  if (j.contains("mu")) {
    const auto& m = j["mu"];
    cfg.mu.kind = m.value("kind", std::string("constant"));
    cfg.mu.value = m.value("value", 1.0);
    cfg.mu.scale = m.value("scale", 0.3);
    if (m.contains("seed")) cfg.mu.seed = m["seed"].get<uint64_t>();
    if (m.contains("coeffs")) cfg.mu.poly = poly_from_json(m["coeffs"], cfg.n);
  }
  if (j.contains("directions")) {
    cfg.directions.mode = j["directions"].value("mode", std::string("minimal"));
    cfg.directions.count = j["directions"].value("count", 0);
  }
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    cfg.tol.transformation = t.value("transformation", cfg.tol.transformation);
    cfg.tol.residual = t.value("residual", cfg.tol.residual);
    cfg.tol.residual_top = t.value("residual_top", cfg.tol.residual_top);
    cfg.tol.roundtrip = t.value("roundtrip", cfg.tol.roundtrip);
    cfg.tol.homogeneity = t.value("homogeneity", cfg.tol.homogeneity);
    cfg.tol.imaginary = t.value("imaginary", cfg.tol.imaginary);
    cfg.tol.flat_exact = t.value("flat_exact", cfg.tol.flat_exact);
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw UsageError("config: parse error in " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

Jet random_jet(const std::shared_ptr<const JetSpace>& sp, Rng* rng, double scale) {
  Jet j = Jet::zero(sp);
  for (const auto& m : sp->monomials()) {
    const double v = rng->uniform(-scale, scale) / double(1 + m.degree());
    if (v != 0.0) j.set_coeff(m, v);
  }
  return j;
}

BoundaryNormalMetric generate_metric(const ScenarioConfig& cfg, const std::shared_ptr<const JetSpace>& sp) {
  const int nt = cfg.n - 1;
  JetMatrix block(sp, nt, nt);
  for (int a = 0; a < nt; ++a) block.at(a, a) = Jet::constant(sp, 1.0);

  if (cfg.metric.family == "flat") {
    // identity block
  } else if (cfg.metric.family == "conformal") {
    if (cfg.metric.polys.size() != 1) throw UsageError("config: conformal family needs a 'factor' polynomial");
    const Jet factor = jet_from_poly(cfg.metric.polys[0], sp);
    for (int a = 0; a < nt; ++a) block.at(a, a) = factor;
  } else if (cfg.metric.family == "diagonal") {
    if (static_cast<int>(cfg.metric.polys.size()) != nt)
      throw UsageError("config: diagonal family needs n-1 'entries' polynomials");
    for (int a = 0; a < nt; ++a) block.at(a, a) = jet_from_poly(cfg.metric.polys[static_cast<size_t>(a)], sp);
  } else if (cfg.metric.family == "explicit") {
    if (static_cast<int>(cfg.metric.polys.size()) != nt * nt)
      throw UsageError("config: explicit family needs an (n-1)x(n-1) 'g_upper' table");
    for (int a = 0; a < nt; ++a)
      for (int b = 0; b < nt; ++b)
        block.at(a, b) = jet_from_poly(cfg.metric.polys[static_cast<size_t>(a * nt + b)], sp);
  } else if (cfg.metric.family == "random") {
    // identity plus a small seeded symmetric perturbation; the scale bound
    // keeps the base values positive definite
    const double s = std::min(cfg.metric.scale, 0.4 / double(nt));
    Rng rng(cfg.metric.seed.value_or(cfg.seed));
    for (int a = 0; a < nt; ++a)
      for (int b = a; b < nt; ++b) {
        const Jet p = random_jet(sp, &rng, s);
        block.at(a, b) = block.at(a, b) + p;
        if (a != b) block.at(b, a) = block.at(b, a) + p;
      }
  }
  return BoundaryNormalMetric::make(sp, block, generate_mu(cfg, sp));
}

Jet generate_mu(const ScenarioConfig& cfg, const std::shared_ptr<const JetSpace>& sp) {
  if (cfg.mu.kind == "constant") return Jet::constant(sp, cfg.mu.value);
  if (cfg.mu.kind == "poly") {
    const Jet j = jet_from_poly(cfg.mu.poly, sp);
    return j;
  }
  // random: 1 + bounded perturbation, positive at the base point
  Rng rng(cfg.mu.seed.value_or(cfg.seed + 0x9e3779b97f4a7c15ull));
  return Jet::constant(sp, 1.0) + random_jet(sp, &rng, std::min(cfg.mu.scale, 0.45));
}

std::vector<std::vector<double>> make_directions(const BoundaryNormalMetric& m, const DirectionSpec& spec,
                                                 uint64_t seed) {
  const int nt = m.n - 1;
  std::vector<std::vector<double>> raw;
  for (int a = 0; a < nt; ++a) {
    std::vector<double> v(static_cast<size_t>(nt), 0.0);
    v[static_cast<size_t>(a)] = 1.0;
    raw.push_back(v);
  }
  for (int a = 0; a < nt; ++a)
    for (int b = a + 1; b < nt; ++b) {
      std::vector<double> v(static_cast<size_t>(nt), 0.0);
      v[static_cast<size_t>(a)] = 1.0;
      v[static_cast<size_t>(b)] = 1.0;
      raw.push_back(v);
    }
  if (spec.mode == "oversampled") {
    Rng rng(seed ^ 0xd1b54a32d192ed03ull);
    for (int extra = 0; extra < std::max(spec.count, 1); ++extra) {
      std::vector<double> v(static_cast<size_t>(nt));
      double norm2 = 0.0;
      do {
        norm2 = 0.0;
        for (auto& c : v) {
          c = rng.uniform(-1.0, 1.0);
          norm2 += c * c;
        }
      } while (norm2 < 0.05);
      raw.push_back(v);
    }
  }
  // normalize in the base metric
  for (auto& v : raw) {
    double q = 0.0;
    for (int a = 0; a < nt; ++a)
      for (int b = 0; b < nt; ++b) q += m.g_upper.at(a, b).value().real() * v[static_cast<size_t>(a)] * v[static_cast<size_t>(b)];
    const double s = 1.0 / std::sqrt(q);
    for (auto& c : v) c *= s;
  }
  return raw;
}

RandomScenario make_random_scenario(int n, int jet_order, uint64_t seed) {
  ScenarioConfig cfg;
  cfg.n = n;
  cfg.depth = 0;
  cfg.jet_order = jet_order;
  cfg.seed = seed;
  cfg.metric.family = "random";
  cfg.mu.kind = "random";
  cfg.validate();
  const auto sp = JetSpace::make(n, 0, jet_order, std::vector<double>(static_cast<size_t>(n), 0.0));
  RandomScenario sc{generate_metric(cfg, sp), {}, Jet(), {}};
  Rng rng(seed ^ 0xa0761d6478bd642full);
  for (int j = 0; j < n; ++j) sc.w.push_back(random_jet(sp, &rng, 1.0));
  sc.f = random_jet(sp, &rng, 1.0);
  sc.directions = make_directions(sc.metric, DirectionSpec{}, seed);
  return sc;
}

// ---------------------------------------------------------------- serialization

Json jet_to_json(const Jet& j) {
  Json terms = Json::array();
  for (const auto& [m, c] : j.terms()) {
    Json exps = Json::array();
    for (int v = 0; v < m.nvars(); ++v) exps.push_back(m[v]);
    terms.push_back(Json::array({exps, c.real(), c.imag()}));
  }
  return Json{{"order", j.order()}, {"terms", terms}};
}

Jet jet_from_json(const Json& j, const std::shared_ptr<const JetSpace>& sp) {
  Jet out = Jet::zero(sp, j.at("order").get<int>());
  for (const auto& term : j.at("terms")) {
    MultiIndex m(sp->vars());
    const auto& exps = term[0];
    if (static_cast<int>(exps.size()) != sp->vars()) throw UsageError("dump: exponent arity mismatch");
    for (int v = 0; v < sp->vars(); ++v) m.set(v, exps[static_cast<size_t>(v)].get<int>());
    out.set_coeff(m, Complex(term[1].get<double>(), term[2].get<double>()));
  }
  return out;
}

Json forward_data_to_json(const ForwardData& fd) {
  Json dirs = Json::array();
  for (const auto& dd : fd.directions) {
    Json symbols = Json::array();
    for (const auto& s : dd.seq.symbols) {
      const int trust = s.min_order();
      Json entries = Json::array();
      for (int r = 0; r < s.entries.rows(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < s.entries.cols(); ++c) row.push_back(jet_to_json(s.entries.at(r, c).truncated(trust)));
        entries.push_back(row);
      }
      symbols.push_back(Json{{"degree", s.degree}, {"trustworthy_order", trust}, {"entries", entries}});
    }
    dirs.push_back(Json{{"xi", dd.xi}, {"symbols", symbols}});
  }
  return Json{{"schema", "stokesdtn.symbols.v1"},
              {"n", fd.n},
              {"jet_order", fd.jet_order},
              {"depth", fd.depth},
              {"mu", jet_to_json(fd.mu)},
              {"directions", dirs}};
}

ForwardData forward_data_from_json(const Json& j) {
  if (j.value("schema", std::string()) != "stokesdtn.symbols.v1")
    throw UsageError("dump: unknown or missing schema");
  ForwardData fd;
  fd.n = j.at("n").get<int>();
  fd.jet_order = j.at("jet_order").get<int>();
  fd.depth = j.at("depth").get<int>();
  fd.x_space = JetSpace::make(fd.n, 0, fd.jet_order, std::vector<double>(static_cast<size_t>(fd.n), 0.0));
  fd.mu = jet_from_json(j.at("mu"), fd.x_space);
  for (const auto& dd : j.at("directions")) {
    ForwardData::DirectionData out;
    out.xi = dd.at("xi").get<std::vector<double>>();
    out.seq.n = fd.n;
    out.seq.direction = out.xi;
    out.seq.space = joint_space(fd.x_space, out.xi);
    for (const auto& s : dd.at("symbols")) {
      SymbolMatrix sm;
      sm.degree = s.at("degree").get<int>();
      const auto& entries = s.at("entries");
      const int dim = static_cast<int>(entries.size());
      sm.entries = JetMatrix(out.seq.space, dim, dim);
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) sm.entries.at(r, c) = jet_from_json(entries[static_cast<size_t>(r)][static_cast<size_t>(c)], out.seq.space);
      out.seq.symbols.push_back(std::move(sm));
    }
    out.seq.depth = static_cast<int>(out.seq.symbols.size()) - 1;
    fd.directions.push_back(std::move(out));
  }
  return fd;
}

Json report_to_json(const RecoveryReport& rep) {
  Json orders = Json::array();
  for (const auto& o : rep.orders) {
    Json tensor = Json::array();
    for (int a = 0; a < o.tensor.rows(); ++a) {
      Json row = Json::array();
      for (int b = 0; b < o.tensor.cols(); ++b) row.push_back(jet_to_json(o.tensor.at(a, b)));
      tensor.push_back(row);
    }
    Json kbase = Json::array();
    for (const auto& c : o.k_base) kbase.push_back(Json::array({c.real(), c.imag()}));
    orders.push_back(Json{{"r", o.r},
                          {"trustworthy_order", o.trust_order},
                          {"tensor", tensor},
                          {"diagnostics",
                           Json{{"fit_residual", o.fit_residual},
                                {"asymmetry", o.asymmetry},
                                {"max_imag", o.max_imag},
                                {"euler", o.euler},
                                {"response_condition", o.response_condition},
                                {"trace_form_h_base", Json::array({o.h_base.real(), o.h_base.imag()})},
                                {"trace_form_k_base", kbase}}}});
  }
  return Json{{"schema", "stokesdtn.report.v1"},
              {"n", rep.n},
              {"depth", rep.depth},
              {"jet_order", rep.jet_order},
              {"constants",
               Json{{"order1_metric_coefficient", rep.order1_metric_coefficient},
                    {"order1_contraction_denominator", rep.order1_contraction_denominator},
                    {"higher_metric_coefficient", rep.higher_metric_coefficient},
                    {"higher_contraction_denominator", rep.higher_contraction_denominator},
                    {"inversion_denominator", rep.inversion_denominator}}},
              {"orders", orders}};
}

Json comparison_to_json(const TruthComparison& cmp) {
  Json orders = Json::array();
  for (const auto& o : cmp.orders)
    orders.push_back(Json{{"r", o.r},
                          {"abs_err", o.abs_err},
                          {"rel_err", o.rel_err},
                          {"compared_order", o.compared_order}});
  return Json{{"schema", "stokesdtn.comparison.v1"}, {"orders", orders}, {"max_rel_err", cmp.max_rel_err}};
}

std::string report_to_text(const RecoveryReport& rep, const TruthComparison* cmp) {
  std::ostringstream os;
  os << "recovered boundary jets (n = " << rep.n << ", depth = " << rep.depth
     << ", jet order = " << rep.jet_order << ")\n";
  os << "constants: first-order (" << rep.order1_metric_coefficient << ", "
     << rep.order1_contraction_denominator << "), higher (" << rep.higher_metric_coefficient << ", "
     << rep.higher_contraction_denominator << "), inversion /" << rep.inversion_denominator << "\n";
  for (const auto& o : rep.orders) {
    os << "order r = " << o.r << "  (trustworthy tangential order " << o.trust_order << ")\n";
    for (int a = 0; a < o.tensor.rows(); ++a)
      for (int b = a; b < o.tensor.cols(); ++b) {
        os << "  d_n^" << o.r << " g^{" << (a + 1) << (b + 1) << "}:";
        bool any = false;
        for (const auto& [m, c] : o.tensor.at(a, b).terms()) {
          os << " " << c.real() << "*x'" << m.str();
          any = true;
        }
        if (!any) os << " 0";
        os << "\n";
      }
    os << "  diagnostics: fit " << o.fit_residual << ", asym " << o.asymmetry << ", imag " << o.max_imag
       << ", euler " << o.euler << "\n";
    if (cmp) {
      for (const auto& po : cmp->orders)
        if (po.r == o.r)
          os << "  vs truth: abs " << po.abs_err << ", rel " << po.rel_err << " (through order "
             << po.compared_order << ")\n";
    }
  }
  return os.str();
}

}  // namespace stokesdtn
