#include "ergostat/config.hpp"

#include <fstream>
#include <set>

namespace ergo {

using nlohmann::json;

namespace {

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
}

void check_keys(const json& j, const std::string& path, std::set<std::string> allowed) {
  expect_object(j, path);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(path + "." + it.key() + ": unknown key");
}

template <typename T>
T get_or(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

double get_num(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing");
  if (!j.at(key).is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

SystemSpec parse_system(const json& j) {
  const std::string path = "system";
  expect_object(j, path);
  std::string family = get_or<std::string>(j, path, "family", "");
  if (family.empty()) throw ConfigError("system.family: missing");
  try {
    if (family == "linear_expanding") {
      check_keys(j, path, {"family", "degree"});
      return make_linear_expanding(int(get_num(j, path, "degree")));
    }
    if (family == "perturbed_expanding") {
      check_keys(j, path, {"family", "degree", "epsilon"});
      return make_perturbed_expanding(int(get_num(j, path, "degree")),
                                      get_num(j, path, "epsilon"));
    }
    if (family == "product_halving") {
      check_keys(j, path, {"family"});
      return make_product_halving();
    }
    if (family == "bowen_saddles") {
      check_keys(j, path, {"family", "variant", "lambda", "unstable_a", "stable_a",
                           "unstable_b", "stable_b", "mu", "c0", "time_scale",
                           "substeps"});
      if (j.contains("variant")) {
        std::string variant = j.at("variant").get<std::string>();
        double lambda = get_or<double>(j, path, "lambda", 0.5);
        SystemSpec sys = build_bowen(variant, lambda);
        auto p = std::get<BowenSaddles>(sys.family);
        p.substeps = int(get_or<double>(j, path, "substeps", double(p.substeps)));
        return make_bowen(p);
      }
      BowenSaddles p;
      p.unstable_a = get_num(j, path, "unstable_a");
      p.stable_a = get_num(j, path, "stable_a");
      p.unstable_b = get_num(j, path, "unstable_b");
      p.stable_b = get_num(j, path, "stable_b");
      p.mu = get_or<double>(j, path, "mu", p.mu);
      p.c0 = get_or<double>(j, path, "c0", p.c0);
      p.time_scale = get_or<double>(j, path, "time_scale", p.time_scale);
      p.substeps = int(get_or<double>(j, path, "substeps", double(p.substeps)));
      return make_bowen(p);
    }
    if (family == "gradient_time_one") {
      check_keys(j, path, {"family", "substeps"});
      return make_gradient_time_one(int(get_or<double>(j, path, "substeps", 1000.0)));
    }
    if (family == "quadratic_feigenbaum") {
      check_keys(j, path, {"family", "generation"});
      return make_feigenbaum(int(get_or<double>(j, path, "generation", 8.0)));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
  throw ConfigError("system.family: unknown family '" + family + "'");
}

TargetMeasureConfig parse_target(const json& j, const std::string& path) {
  check_keys(j, path, {"type", "point", "path", "name"});
  TargetMeasureConfig t;
  t.type = get_or<std::string>(j, path, "type", "");
  if (t.type == "delta") {
    if (!j.contains("point") || !j.at("point").is_array())
      throw ConfigError(path + ".point: delta target needs a coordinate array");
    auto arr = j.at("point");
    t.point.x() = arr.size() > 0 ? arr.at(0).get<double>() : 0.0;
    t.point.y() = arr.size() > 1 ? arr.at(1).get<double>() : 0.0;
  } else if (t.type == "file") {
    t.path = get_or<std::string>(j, path, "path", "");
    if (t.path.empty()) throw ConfigError(path + ".path: file target needs a path");
  } else if (t.type != "lebesgue") {
    throw ConfigError(path + ".type: expected lebesgue|delta|file");
  }
  t.name = get_or<std::string>(j, path, "name", t.type);
  return t;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  check_keys(j, "config",
             {"preset", "command", "system", "ensemble", "metric", "histogram",
              "pomega", "observability", "decomposition", "equilibrium", "output"});
  ExperimentConfig c;
  c.preset_name = get_or<std::string>(j, "config", "preset", "");
  c.command = get_or<std::string>(j, "config", "command", "");
  if (!j.contains("system")) throw ConfigError("system: missing");
  c.system = parse_system(j.at("system"));

  if (j.contains("ensemble")) {
    const auto& e = j.at("ensemble");
    check_keys(e, "ensemble",
               {"size", "seed", "orbit_length", "checkpoint_start", "checkpoint_ratio",
                "workers"});
    c.ensemble.size = int(get_or<double>(e, "ensemble", "size", 400.0));
    c.ensemble.seed = std::uint64_t(get_or<double>(e, "ensemble", "seed", 2024.0));
    c.ensemble.orbit_length = long(get_or<double>(e, "ensemble", "orbit_length", 0.0));
    c.ensemble.checkpoint_start =
        long(get_or<double>(e, "ensemble", "checkpoint_start", 10.0));
    c.ensemble.checkpoint_ratio = get_or<double>(e, "ensemble", "checkpoint_ratio", 1.1);
    c.ensemble.workers = int(get_or<double>(e, "ensemble", "workers", 0.0));
    if (c.ensemble.size < 100) throw ConfigError("ensemble.size: must be >= 100");
    if (c.ensemble.checkpoint_ratio <= 1.0)
      throw ConfigError("ensemble.checkpoint_ratio: must exceed 1");
  }
  if (j.contains("metric")) {
    const auto& m = j.at("metric");
    check_keys(m, "metric", {"truncation_order"});
    c.truncation_order = int(get_or<double>(m, "metric", "truncation_order", 64.0));
    if (c.truncation_order < 8 || c.truncation_order > 256)
      throw ConfigError("metric.truncation_order: outside [8,256]");
  }
  if (j.contains("histogram")) {
    const auto& h = j.at("histogram");
    check_keys(h, "histogram", {"resolution_1d", "resolution_2d"});
    c.resolution_1d = int(get_or<double>(h, "histogram", "resolution_1d", 1024.0));
    c.resolution_2d = int(get_or<double>(h, "histogram", "resolution_2d", 128.0));
    if (c.resolution_1d < 16 || c.resolution_1d > 65536 || c.resolution_2d < 16 ||
        c.resolution_2d > 2048)
      throw ConfigError("histogram: resolution out of range");
  }
  if (j.contains("pomega")) {
    const auto& p = j.at("pomega");
    check_keys(p, "pomega",
               {"tail_fraction", "cluster_tolerance", "convergence_tolerance",
                "min_tail_checkpoints", "x0"});
    auto& po = c.ensemble.pomega;
    po.tail_fraction = get_or<double>(p, "pomega", "tail_fraction", po.tail_fraction);
    po.cluster_tolerance =
        get_or<double>(p, "pomega", "cluster_tolerance", po.cluster_tolerance);
    po.convergence_tolerance =
        get_or<double>(p, "pomega", "convergence_tolerance", po.convergence_tolerance);
    po.min_tail_checkpoints =
        int(get_or<double>(p, "pomega", "min_tail_checkpoints",
                           double(po.min_tail_checkpoints)));
    if (!(po.tail_fraction > 0.0 && po.tail_fraction < 1.0))
      throw ConfigError("pomega.tail_fraction: outside (0,1)");
    if (p.contains("x0")) {
      const auto& arr = p.at("x0");
      if (!arr.is_array() || arr.empty())
        throw ConfigError("pomega.x0: expected a coordinate array");
      c.pomega_fixed_start = true;
      c.pomega_x0.x() = arr.at(0).get<double>();
      c.pomega_x0.y() = arr.size() > 1 ? arr.at(1).get<double>() : 0.0;
    }
  }
  if (j.contains("observability")) {
    const auto& o = j.at("observability");
    check_keys(o, "observability", {"epsilon_grid", "targets"});
    if (o.contains("epsilon_grid")) {
      c.epsilon_grid.clear();
      for (const auto& v : o.at("epsilon_grid")) {
        if (!v.is_number() || v.get<double>() <= 0)
          throw ConfigError("observability.epsilon_grid: entries must be positive");
        c.epsilon_grid.push_back(v.get<double>());
      }
      if (c.epsilon_grid.size() < 2)
        throw ConfigError("observability.epsilon_grid: need at least two entries");
    }
    if (o.contains("targets")) {
      int idx = 0;
      for (const auto& t : o.at("targets"))
        c.targets.push_back(
            parse_target(t, "observability.targets[" + std::to_string(idx++) + "]"));
    }
  }
  if (j.contains("decomposition")) {
    const auto& d = j.at("decomposition");
    check_keys(d, "decomposition",
               {"cluster_tolerance", "independence_tolerance", "support_mass_threshold"});
    c.decomposition.cluster_tolerance = get_or<double>(
        d, "decomposition", "cluster_tolerance", c.decomposition.cluster_tolerance);
    c.decomposition.independence_tolerance =
        get_or<double>(d, "decomposition", "independence_tolerance",
                       c.decomposition.independence_tolerance);
    c.decomposition.support_mass_threshold =
        get_or<double>(d, "decomposition", "support_mass_threshold",
                       c.decomposition.support_mass_threshold);
  }
  if (j.contains("equilibrium")) {
    const auto& e = j.at("equilibrium");
    check_keys(e, "equilibrium",
               {"block_order", "orbit_length", "r_grid", "typical_orbits",
                "periodic_points", "large_deviation"});
    auto& q = c.equilibrium;
    q.ply.block_order =
        int(get_or<double>(e, "equilibrium", "block_order", double(q.ply.block_order)));
    q.ply.orbit_length =
        long(get_or<double>(e, "equilibrium", "orbit_length", double(q.ply.orbit_length)));
    if (e.contains("r_grid")) {
      q.ply.r_grid.clear();
      for (const auto& v : e.at("r_grid")) q.ply.r_grid.push_back(v.get<double>());
    }
    q.typical_orbits =
        int(get_or<double>(e, "equilibrium", "typical_orbits", double(q.typical_orbits)));
    if (e.contains("periodic_points"))
      for (const auto& orbit : e.at("periodic_points")) {
        std::vector<double> pts;
        for (const auto& v : orbit) pts.push_back(v.get<double>());
        if (pts.empty()) throw ConfigError("equilibrium.periodic_points: empty orbit");
        q.periodic_points.push_back(pts);
      }
    if (e.contains("large_deviation")) {
      const auto& ld = e.at("large_deviation");
      check_keys(ld, "equilibrium.large_deviation", {"r", "radius", "ns", "samples"});
      q.large_deviation.enabled = true;
      q.large_deviation.r = get_or<double>(ld, "ld", "r", 0.1);
      q.large_deviation.radius = get_or<double>(ld, "ld", "radius", 0.1);
      if (ld.contains("ns")) {
        q.large_deviation.ns.clear();
        for (const auto& v : ld.at("ns")) q.large_deviation.ns.push_back(v.get<long>());
      }
      q.large_deviation.samples = int(get_or<double>(ld, "ld", "samples", 2000.0));
    }
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    check_keys(o, "output", {"directory"});
    c.output_directory = get_or<std::string>(o, "output", "directory", "out");
  }
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

nlohmann::json config_to_json(const ExperimentConfig& c, bool include_output) {
  json j;
  if (!c.preset_name.empty()) j["preset"] = c.preset_name;
  if (!c.command.empty()) j["command"] = c.command;

  json sys;
  struct V {
    json& sys;
    void operator()(const LinearExpanding& f) {
      sys["family"] = "linear_expanding";
      sys["degree"] = f.degree;
    }
    void operator()(const PerturbedExpanding& f) {
      sys["family"] = "perturbed_expanding";
      sys["degree"] = f.degree;
      sys["epsilon"] = f.epsilon;
    }
    void operator()(const ProductHalving&) { sys["family"] = "product_halving"; }
    void operator()(const BowenSaddles& f) {
      sys["family"] = "bowen_saddles";
      sys["unstable_a"] = f.unstable_a;
      sys["stable_a"] = f.stable_a;
      sys["unstable_b"] = f.unstable_b;
      sys["stable_b"] = f.stable_b;
      sys["mu"] = f.mu;
      sys["c0"] = f.c0;
      sys["time_scale"] = f.time_scale;
      sys["substeps"] = f.substeps;
    }
    void operator()(const GradientTimeOne& f) {
      sys["family"] = "gradient_time_one";
      sys["substeps"] = f.substeps;
    }
    void operator()(const QuadraticFeigenbaum& f) {
      sys["family"] = "quadratic_feigenbaum";
      sys["generation"] = f.generation;
    }
  };
  std::visit(V{sys}, c.system.family);
  j["system"] = sys;

  j["ensemble"] = {{"size", c.ensemble.size},
                   {"seed", c.ensemble.seed},
                   {"orbit_length", c.ensemble.orbit_length},
                   {"checkpoint_start", c.ensemble.checkpoint_start},
                   {"checkpoint_ratio", c.ensemble.checkpoint_ratio}};
  j["metric"] = {{"truncation_order", c.truncation_order}};
  j["histogram"] = {{"resolution_1d", c.resolution_1d}, {"resolution_2d", c.resolution_2d}};
  json po = {{"tail_fraction", c.ensemble.pomega.tail_fraction},
             {"cluster_tolerance", c.ensemble.pomega.cluster_tolerance},
             {"convergence_tolerance", c.ensemble.pomega.convergence_tolerance},
             {"min_tail_checkpoints", c.ensemble.pomega.min_tail_checkpoints}};
  if (c.pomega_fixed_start) po["x0"] = {c.pomega_x0.x(), c.pomega_x0.y()};
  j["pomega"] = po;

  json obs = {{"epsilon_grid", c.epsilon_grid}};
  if (!c.targets.empty()) {
    json targets = json::array();
    for (const auto& t : c.targets) {
      json tj = {{"type", t.type}, {"name", t.name}};
      if (t.type == "delta") tj["point"] = {t.point.x(), t.point.y()};
      if (t.type == "file") tj["path"] = t.path;
      targets.push_back(tj);
    }
    obs["targets"] = targets;
  }
  j["observability"] = obs;

  j["decomposition"] = {
      {"cluster_tolerance", c.decomposition.cluster_tolerance},
      {"independence_tolerance", c.decomposition.independence_tolerance},
      {"support_mass_threshold", c.decomposition.support_mass_threshold}};

  json eq = {{"block_order", c.equilibrium.ply.block_order},
             {"orbit_length", c.equilibrium.ply.orbit_length},
             {"r_grid", c.equilibrium.ply.r_grid},
             {"typical_orbits", c.equilibrium.typical_orbits}};
  if (!c.equilibrium.periodic_points.empty())
    eq["periodic_points"] = c.equilibrium.periodic_points;
  if (c.equilibrium.large_deviation.enabled)
    eq["large_deviation"] = {{"r", c.equilibrium.large_deviation.r},
                             {"radius", c.equilibrium.large_deviation.radius},
                             {"ns", c.equilibrium.large_deviation.ns},
                             {"samples", c.equilibrium.large_deviation.samples}};
  j["equilibrium"] = eq;
  if (include_output) j["output"] = {{"directory", c.output_directory}};
  return j;
}

std::vector<std::string> preset_names() {
  return {"doubling",          "perturbed_expanding", "product_halving",
          "bowen_oscillating", "bowen_physical",      "gradient_sinks",
          "feigenbaum_measure_checks"};
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.preset_name = name;
  if (name == "doubling") {
    c.system = make_linear_expanding(2);
    c.command = "observability";
    c.ensemble.size = 400;
    c.ensemble.orbit_length = 1000000;
    c.equilibrium.ply.block_order = 12;
    c.equilibrium.ply.orbit_length = 1000000;
    c.equilibrium.periodic_points = {{0.0}, {1.0 / 3.0, 2.0 / 3.0}};
    c.equilibrium.large_deviation.enabled = true;
  } else if (name == "perturbed_expanding") {
    c.system = make_perturbed_expanding(2, 0.3);
    c.command = "equilibrium";
    c.ensemble.size = 400;
    c.ensemble.orbit_length = 200000;
    c.equilibrium.ply.block_order = 10;
    c.equilibrium.ply.orbit_length = 200000;
    c.equilibrium.periodic_points = {{0.0}};
  } else if (name == "product_halving") {
    c.system = make_product_halving();
    c.command = "observability";
    c.ensemble.size = 400;
    c.ensemble.orbit_length = 10000;
    c.targets.push_back({"delta", Point(0.0, 0.5), "", "delta_origin_half"});
  } else if (name == "bowen_oscillating") {
    c.system = build_bowen("oscillating");
    c.command = "decompose";
    c.ensemble.size = 400;
    c.ensemble.orbit_length = 100000;
  } else if (name == "bowen_physical") {
    c.system = build_bowen("physical", 0.5);
    c.command = "decompose";
    c.ensemble.size = 128;
    c.ensemble.orbit_length = 1000000;
  } else if (name == "gradient_sinks") {
    c.system = make_gradient_time_one(200);
    c.command = "decompose";
    c.ensemble.size = 160;
    c.ensemble.orbit_length = 15000;
    c.ensemble.pomega.min_tail_checkpoints = 18;
  } else if (name == "feigenbaum_measure_checks") {
    c.system = make_feigenbaum(8);
    c.command = "gallery";
    c.ensemble.size = 100;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  std::string dump = config_to_json(c, false).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace ergo
