#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "stokesdtn/recovery.hpp"

namespace stokesdtn {

using Json = nlohmann::json;

struct Tolerances {
  double transformation = 1e-10;  // relative, verify_transformation
  double residual = 1e-9;         // relative, per residual degree
  double residual_top = 1e-13;    // degree-2 residual (machine zero)
  double roundtrip = 1e-8;        // relative, recovered vs truth
  double homogeneity = 1e-10;     // Euler identity
  double imaginary = 1e-10;
  double flat_exact = 1e-12;
};

struct MetricSpec {
  std::string family = "flat";  // flat | conformal | diagonal | random | explicit
  // conformal: factor polynomial; diagonal: one polynomial per entry;
  // explicit: full tangential block
  std::vector<std::vector<std::pair<MultiIndex, double>>> polys;
  double scale = 0.15;  // random family
  std::optional<uint64_t> seed;
};

struct MuSpec {
  std::string kind = "constant";  // constant | poly | random
  double value = 1.0;
  std::vector<std::pair<MultiIndex, double>> poly;
  double scale = 0.3;
  std::optional<uint64_t> seed;
};

struct DirectionSpec {
  std::string mode = "minimal";  // minimal | oversampled
  int count = 0;                 // extra directions when oversampled
};

struct ScenarioConfig {
  int n = 2;
  int depth = 1;
  int jet_order = 0;         // 0 = "auto"
  int tangential_order = 0;  // extra budget when jet_order is auto
  uint64_t seed = 1;
  MetricSpec metric;
  MuSpec mu;
  DirectionSpec directions;
  Tolerances tol;
  std::string out_dir = "out";

  int effective_jet_order() const { return jet_order > 0 ? jet_order : depth + 2 + tangential_order; }
  void validate() const;
};

ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig config_from_json(const Json& j);

// Deterministic uniform double stream; the standard distributions are not
// pinned across library implementations, this mapping is.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}
  double uniform(double lo, double hi) {
    const double u = double(eng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 eng_;
};

Jet random_jet(const std::shared_ptr<const JetSpace>& sp, Rng* rng, double scale);

BoundaryNormalMetric generate_metric(const ScenarioConfig& cfg, const std::shared_ptr<const JetSpace>& sp);
Jet generate_mu(const ScenarioConfig& cfg, const std::shared_ptr<const JetSpace>& sp);

// Coordinate directions plus normalized pair sums; unit length in the base
// metric. Oversampled mode appends seeded random unit directions.
std::vector<std::vector<double>> make_directions(const BoundaryNormalMetric& m, const DirectionSpec& spec,
                                                 uint64_t seed);

// One fully seeded random scenario; shared by the verify driver, the tests
// and the acceptance suite.
struct RandomScenario {
  BoundaryNormalMetric metric;
  std::vector<Jet> w;
  Jet f;
  std::vector<std::vector<double>> directions;
};
RandomScenario make_random_scenario(int n, int jet_order, uint64_t seed);

// serialization (exact round trip; doubles print shortest-exact)
Json jet_to_json(const Jet& j);
Jet jet_from_json(const Json& j, const std::shared_ptr<const JetSpace>& sp);
Json forward_data_to_json(const ForwardData& fd);
ForwardData forward_data_from_json(const Json& j);
Json report_to_json(const RecoveryReport& rep);
std::string report_to_text(const RecoveryReport& rep, const TruthComparison* cmp);
Json comparison_to_json(const TruthComparison& cmp);

}  // namespace stokesdtn
