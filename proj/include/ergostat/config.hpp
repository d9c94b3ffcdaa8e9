#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ergostat/attractors.hpp"
#include "ergostat/equilibrium.hpp"
#include "ergostat/observability.hpp"
#include "ergostat/systems.hpp"

// vendored nlohmann/json single header
#include <json.hpp>

namespace ergo {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct TargetMeasureConfig {
  std::string type;           // "lebesgue" | "delta" | "file"
  Point point = Point::Zero();  // for delta
  std::string path;             // for file
  std::string name;
};

struct LargeDeviationConfig {
  bool enabled = false;
  double r = 0.1;
  double radius = 0.1;
  std::vector<long> ns = {10, 100, 1000, 10000};
  int samples = 2000;
};

struct EquilibriumConfig {
  PlyOptions ply;
  int typical_orbits = 3;
  std::vector<std::vector<double>> periodic_points;  // each an exact periodic orbit
  LargeDeviationConfig large_deviation;
};

struct ExperimentConfig {
  std::string preset_name;  // empty unless built from a preset
  std::string command;      // default pipeline for this config
  SystemSpec system = make_linear_expanding(2);
  EnsembleOptions ensemble;
  int truncation_order = 64;
  int resolution_1d = 1024;
  int resolution_2d = 128;
  bool pomega_fixed_start = false;
  Point pomega_x0 = Point::Zero();
  std::vector<double> epsilon_grid = {0.2, 0.1, 0.05, 0.02, 0.01};
  std::vector<TargetMeasureConfig> targets;  // empty: per-system defaults
  DecomposeOptions decomposition;
  EquilibriumConfig equilibrium;
  long convexlike_budget = 10000000;
  std::string output_directory = "out";

  int histogram_resolution() const {
    return system.space.dimension() == 1 ? resolution_1d : resolution_2d;
  }
};

// Strict parsing: every unknown key is rejected with its field path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

// include_output = false drops the output block: that form feeds the
// manifest and the hash, so where results land never changes what they are.
nlohmann::json config_to_json(const ExperimentConfig& c, bool include_output = true);

// Ready-to-run configurations for the gallery examples.
std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

// FNV-1a over the canonical dump; stamped into every output file.
std::uint64_t config_hash(const ExperimentConfig& c);

}  // namespace ergo
