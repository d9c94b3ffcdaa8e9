#include "ergostat/runner.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ergostat/measure_io.hpp"
#include "ergostat/rng.hpp"

namespace ergo {

namespace fs = std::filesystem;
using nlohmann::json;

const char* kVersion = "1.0.0";

namespace {

struct RunContext {
  ExperimentConfig config;
  TestFunctionBasis basis;
  HistogramGrid grid;
  BasisTable table;
  fs::path outdir;
  std::string manifest_hex;

  explicit RunContext(const ExperimentConfig& c)
      : config(c),
        basis(c.system.space, c.truncation_order),
        grid{c.system.space, c.histogram_resolution()},
        table(basis, grid),
        outdir(c.output_directory) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(c)));
    manifest_hex = buf;
  }
};

void atomic_write(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + tmp.string());
    os << content;
    if (!os.good()) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_measure_stamped(const RunContext& ctx, const fs::path& path,
                           const ProbMeasure& mu) {
  std::ostringstream ms;
  write_measure(ms, mu);
  std::string text = ms.str();
  size_t eol = text.find('\n');
  text.insert(eol + 1, "# manifest " + ctx.manifest_hex + "\n");
  atomic_write(path, text);
}

void write_json(const RunContext& ctx, const std::string& name, json j) {
  j["manifest"] = ctx.manifest_hex;
  atomic_write(ctx.outdir / name, j.dump(2) + "\n");
}

class Csv {
 public:
  explicit Csv(const RunContext& ctx) { os_ << "# manifest " << ctx.manifest_hex << "\n"; }
  Csv& raw(const std::string& s) {
    os_ << s;
    return *this;
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

void write_manifest(const RunContext& ctx, const std::string& command) {
  json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["config"] = config_to_json(ctx.config, false);
  j["config_hash"] = ctx.manifest_hex;
  j["seed"] = ctx.config.ensemble.seed;
  write_json(ctx, "manifest.json", j);
}

ProbMeasure resolve_target(const RunContext& ctx, const TargetMeasureConfig& t) {
  if (t.type == "lebesgue") return ProbMeasure::uniform_histogram(ctx.grid);
  if (t.type == "delta")
    return ProbMeasure::delta(ctx.config.system.space, t.point);
  if (t.type == "file") return read_measure_file(t.path);
  throw ConfigError("unknown target type '" + t.type + "'");
}

// Per-system default reference measures for traces and profiles.
std::vector<std::pair<std::string, ProbMeasure>> default_references(const RunContext& ctx) {
  const SystemSpec& sys = ctx.config.system;
  std::vector<std::pair<std::string, ProbMeasure>> refs;
  if (std::holds_alternative<BowenSaddles>(sys.family)) {
    BowenGeometry geom = bowen_geometry(sys);
    ProbMeasure da = ProbMeasure::delta(sys.space, geom.saddle_a);
    ProbMeasure db = ProbMeasure::delta(sys.space, geom.saddle_b);
    refs.emplace_back("delta_A", da);
    refs.emplace_back("delta_B", db);
    refs.emplace_back("mid_AB", convex_combine(0.5, da, db));
    return refs;
  }
  if (std::holds_alternative<ProductHalving>(sys.family)) {
    refs.emplace_back("delta_origin_half",
                      ProbMeasure::delta(sys.space, Point(0.0, 0.5)));
    refs.emplace_back("lebesgue", ProbMeasure::uniform_histogram(ctx.grid));
    return refs;
  }
  if (std::holds_alternative<GradientTimeOne>(sys.family)) {
    refs.emplace_back("delta_center",
                      ProbMeasure::delta(sys.space, Point(0.5, 0.0)));
    auto sinks = gradient_sinks(5e-2);
    for (size_t i = 0; i < std::min<size_t>(3, sinks.size()); ++i)
      refs.emplace_back("delta_sink" + std::to_string(i),
                        ProbMeasure::delta(sys.space, Point(sinks[i], 0.0)));
    return refs;
  }
  if (std::holds_alternative<QuadraticFeigenbaum>(sys.family)) {
    int gen = std::get<QuadraticFeigenbaum>(sys.family).generation;
    refs.emplace_back("feigenbaum_gen" + std::to_string(gen),
                      feigenbaum_reference_measure(gen));
    return refs;
  }
  refs.emplace_back("lebesgue", ProbMeasure::uniform_histogram(ctx.grid));
  refs.emplace_back("delta_0", ProbMeasure::delta(sys.space, Point(0.0, 0.0)));
  return refs;
}

json pomega_to_json(const PomegaEstimate& est) {
  json clusters = json::array();
  for (const auto& c : est.clusters)
    clusters.push_back({{"n", c.n}, {"members", c.size}});
  return {{"clusters", clusters},
          {"cluster_radius", est.cluster_radius},
          {"oscillation_amplitude", est.oscillation_amplitude},
          {"converged", est.converged},
          {"tail_n_min", est.tail_n_min},
          {"tail_n_max", est.tail_n_max}};
}

// ---------------------------------------------------------------------------

void run_pomega(RunContext& ctx) {
  const auto& cfg = ctx.config;
  if (!cfg.system.iterable())
    throw ConfigError("pomega: system '" + cfg.system.name() + "' is not iterable");
  long n_max = cfg.ensemble.orbit_length > 0
                   ? cfg.ensemble.orbit_length
                   : (cfg.system.space.dimension() == 1 ? 1000000 : 100000);
  OrbitOrigin origin = cfg.pomega_fixed_start
                           ? OrbitOrigin::from_point(cfg.pomega_x0)
                           : OrbitOrigin::from_seed(derive_seed(cfg.ensemble.seed, 0));
  auto schedule = checkpoint_schedule(cfg.ensemble.checkpoint_start,
                                      cfg.ensemble.checkpoint_ratio, n_max);
  EmpiricalSequence seq = empirical_sequence(cfg.system, origin, n_max, schedule, ctx.table);
  PomegaEstimate est = pomega_estimate(seq, cfg.ensemble.pomega, ctx.basis);

  auto refs = default_references(ctx);
  std::vector<Eigen::VectorXd> ref_sigs;
  for (auto& [name, mu] : refs) ref_sigs.push_back(ctx.basis.signature(mu));

  // histogram dumps for a bounded set of checkpoints
  fs::create_directories(ctx.outdir / "histograms");
  std::set<long> dump_ns;
  {
    std::vector<long> tail;
    for (const auto& cp : seq.checkpoints)
      if (double(cp.n) >= 0.01 * double(n_max)) tail.push_back(cp.n);
    size_t cap = 32;
    for (size_t i = 0; i < tail.size(); ++i)
      if (tail.size() <= cap || i % ((tail.size() + cap - 1) / cap) == 0)
        dump_ns.insert(tail[i]);
    dump_ns.insert(seq.checkpoints.back().n);
  }

  Csv csv(ctx);
  std::string header = "n";
  for (auto& [name, mu] : refs) header += ",dist_" + name;
  header += ",gap,histogram_file\n";
  csv.raw(header);
  for (const auto& cp : seq.checkpoints) {
    std::string row = std::to_string(cp.n);
    for (const auto& sig : ref_sigs)
      row += "," + format_double(ctx.basis.signature_distance(cp.signature, sig));
    row += "," + format_double(cp.gap);
    if (dump_ns.count(cp.n)) {
      std::string fname = "histograms/hist_" + std::to_string(cp.n) + ".measure";
      write_measure_stamped(ctx, ctx.outdir / fname,
                            materialize_empirical(cfg.system, origin, cp.n, ctx.grid));
      row += "," + fname;
    } else {
      row += ",-";
    }
    csv.raw(row + "\n");
  }
  atomic_write(ctx.outdir / "checkpoints.csv", csv.str());

  json j = pomega_to_json(est);
  j["system"] = cfg.system.name();
  j["n_max"] = n_max;
  j["x0"] = {seq.x0.x(), seq.x0.y()};
  write_json(ctx, "pomega.json", j);
}

InitialEnsemble build_ensemble_from_config(const RunContext& ctx) {
  if (!ctx.config.system.iterable())
    throw ConfigError("ensemble: system '" + ctx.config.system.name() +
                      "' is not iterable");
  return build_ensemble(ctx.config.system, ctx.config.ensemble, ctx.table, ctx.basis);
}

void run_observability(RunContext& ctx) {
  InitialEnsemble ens = build_ensemble_from_config(ctx);

  auto reps = observable_set_estimate(ens, ctx.config.decomposition.cluster_tolerance,
                                      ctx.basis);
  json reps_json = json::array();
  fs::create_directories(ctx.outdir / "measures");
  for (size_t i = 0; i < reps.size(); ++i) {
    std::string fname = "measures/representative_" + std::to_string(i) + ".measure";
    write_measure_stamped(
        ctx, ctx.outdir / fname,
        materialize_empirical(ens.system,
                              ens.points[size_t(reps[i].source_point)].origin,
                              reps[i].source_n, ctx.grid));
    reps_json.push_back({{"mass", reps[i].attracting_mass.estimate},
                         {"mass_ci", {reps[i].attracting_mass.low,
                                      reps[i].attracting_mass.high}},
                         {"merged_clusters", reps[i].merged_clusters},
                         {"measure_file", fname}});
  }

  // target profiles
  std::vector<TargetMeasureConfig> targets = ctx.config.targets;
  if (targets.empty()) {
    for (auto& [name, mu] : default_references(ctx)) {
      TargetMeasureConfig t;
      t.type = "builtin";
      t.name = name;
      targets.push_back(t);
    }
  }
  auto builtin = default_references(ctx);
  json profiles = json::array();
  for (size_t ti = 0; ti < targets.size(); ++ti) {
    Eigen::VectorXd sig;
    if (targets[ti].type == "builtin") {
      sig = ctx.basis.signature(builtin[ti].second);
    } else {
      sig = ctx.basis.signature(resolve_target(ctx, targets[ti]));
    }
    auto prof = observability_size(ens, sig, ctx.config.epsilon_grid, ctx.basis);
    Csv csv(ctx);
    csv.raw("epsilon,o,ci_low,ci_high\n");
    for (const auto& row : prof.rows)
      csv.raw(format_double(row.epsilon) + "," + format_double(row.o.estimate) + "," +
              format_double(row.o.low) + "," + format_double(row.o.high) + "\n");
    std::string fname = "observability_" + targets[ti].name + ".csv";
    atomic_write(ctx.outdir / fname, csv.str());
    profiles.push_back({{"target", targets[ti].name},
                        {"physical", prof.physical},
                        {"basin_fraction", prof.basin_fraction},
                        {"profile_file", fname}});
  }

  // minimality of the estimated observable set
  std::vector<Eigen::VectorXd> net;
  for (const auto& r : reps) net.push_back(r.signature);
  auto minimality = minimality_check(ens, net, 2.0 * ctx.config.decomposition.cluster_tolerance,
                                     ctx.basis);

  long converged = 0;
  for (const auto& pt : ens.points) converged += pt.pomega.converged;
  write_json(ctx, "observability.json",
             {{"system", ctx.config.system.name()},
              {"ensemble_size", ens.points.size()},
              {"orbit_length", ens.orbit_length},
              {"converged_fraction", double(converged) / double(ens.points.size())},
              {"representatives", reps_json},
              {"profiles", profiles},
              {"minimality_full_basin", minimality.full_basin},
              {"minimality_escaping_fraction", minimality.escaping_fraction.estimate}});
}

void run_decompose(RunContext& ctx) {
  InitialEnsemble ens = build_ensemble_from_config(ctx);
  Decomposition dec = decompose(ens, ctx.config.decomposition, ctx.basis);

  fs::create_directories(ctx.outdir / "measures");
  json records = json::array();
  for (size_t r = 0; r < dec.records.size(); ++r) {
    const auto& rec = dec.records[r];
    // support bins file
    Csv sup(ctx);
    sup.raw("bin,center_x,center_y\n");
    for (Eigen::Index b : rec.support_bins) {
      Point c = ctx.grid.bin_center(b);
      sup.raw(std::to_string(b) + "," + format_double(c.x()) + "," +
              format_double(c.y()) + "\n");
    }
    std::string sup_name = "measures/record_" + std::to_string(r) + "_support.csv";
    atomic_write(ctx.outdir / sup_name, sup.str());

    json cluster_files = json::array();
    size_t cap = std::min<size_t>(rec.cluster_sources.size(), 8);
    for (size_t k = 0; k < cap; ++k) {
      size_t pick = rec.cluster_sources.size() <= cap
                        ? k
                        : k * rec.cluster_sources.size() / cap;
      auto [pt_idx, n_at] = rec.cluster_sources[pick];
      std::string fname = "measures/record_" + std::to_string(r) + "_cluster_" +
                          std::to_string(k) + ".measure";
      write_measure_stamped(
          ctx, ctx.outdir / fname,
          materialize_empirical(ens.system, ens.points[size_t(pt_idx)].origin, n_at,
                                ctx.grid));
      cluster_files.push_back(fname);
    }
    records.push_back({{"diameter", rec.diameter},
                       {"size", rec.attracting_size.estimate},
                       {"ci", {rec.attracting_size.low, rec.attracting_size.high}},
                       {"irreducible", rec.irreducible},
                       {"basin_points", rec.basin_sample.size()},
                       {"support_bins_file", sup_name},
                       {"support_mass", rec.support_mass},
                       {"cluster_files", cluster_files}});
  }

  long converged = 0;
  for (const auto& pt : ens.points) converged += pt.pomega.converged;

  json j;
  j["system"] = ctx.config.system.name();
  j["records"] = records;
  j["converged_fraction"] = double(converged) / double(ens.points.size());
  j["unassigned_fraction"] = dec.unassigned_fraction;
  j["cluster_tolerance"] = dec.cluster_tolerance;
  j["independence_tolerance"] = dec.independence_tolerance;

  CoverCheck cover = cochain_cover_check(dec);
  j["verdicts"] = {{"covers", cover.covers},
                   {"all_physical", cover.all_physical},
                   {"physical_measures_exist", cover.physical_measures_exist},
                   {"verdict", cover.verdict}};
  if (dec.records.size() <= 10) {
    auto chains = chain_cochain_analysis(dec);
    j["k"] = chains.k;
    j["h"] = chains.h;
  } else {
    j["k"] = nullptr;
    j["h"] = nullptr;
    j["chain_note"] = "more than 10 records; re-run with coarser clustering for the "
                      "lattice analysis";
  }
  write_json(ctx, "decomposition.json", j);
}

void run_equilibrium(RunContext& ctx) {
  const auto& cfg = ctx.config;
  if (!cfg.system.derivative_available())
    throw ConfigError("equilibrium: '" + cfg.system.name() +
                      "' is not a circle expanding map");
  PlyOptions opt = cfg.equilibrium.ply;

  std::vector<MeasureWitness> pool;
  for (const auto& orbit_pts : cfg.equilibrium.periodic_points) {
    Eigen::Matrix2Xd pts = Eigen::Matrix2Xd::Zero(2, long(orbit_pts.size()));
    for (size_t i = 0; i < orbit_pts.size(); ++i) pts(0, long(i)) = orbit_pts[i];
    ProbMeasure atoms = ProbMeasure::atoms(
        cfg.system.space, pts,
        Eigen::VectorXd::Constant(long(orbit_pts.size()), 1.0 / double(orbit_pts.size())));
    pool.push_back(MeasureWitness::atomic(
        atoms, "periodic_" + std::to_string(orbit_pts.size())));
  }
  for (int i = 0; i < cfg.equilibrium.typical_orbits; ++i)
    pool.push_back(MeasureWitness::orbit(
        OrbitOrigin::from_seed(derive_seed(cfg.ensemble.seed, 1000 + std::uint64_t(i))),
        opt.orbit_length, "typical_" + std::to_string(i)));

  json analyses = json::array();
  double max_v = -std::numeric_limits<double>::infinity();
  std::string argmax;
  bool ruelle_ok = true;
  std::vector<Eigen::VectorXd> kr_pool;
  for (const auto& w : pool) {
    ExpandingAnalysis a = ply_residual(cfg.system, w, opt, ctx.basis, ctx.table);
    json kj = json::array();
    for (auto& [r, member] : a.k_r_flags) kj.push_back({{"r", r}, {"member", member}});
    analyses.push_back({{"label", a.label},
                        {"h", a.entropy.value},
                        {"h_err", a.entropy.error},
                        {"entropy_method", a.entropy.method},
                        {"block_order", a.entropy.block_order},
                        {"L", a.lyapunov},
                        {"L_err", a.lyapunov_error},
                        {"V", a.residual},
                        {"V_err", a.residual_error},
                        {"equilibrium_candidate", a.equilibrium_candidate},
                        {"invariance_warning", a.invariance_warning},
                        {"invariance_gap", a.invariance_gap},
                        {"K_r_flags", kj}});
    if (a.entropy.value > a.lyapunov + a.residual_error + 1e-12) ruelle_ok = false;
    if (a.residual > max_v) {
      max_v = a.residual;
      argmax = a.label;
    }
    if (!a.k_r_flags.empty() && a.residual >= -cfg.equilibrium.large_deviation.r) {
      if (w.kind == MeasureWitness::Kind::Atoms)
        kr_pool.push_back(ctx.basis.signature(*w.atoms));
      else
        kr_pool.push_back(ctx.basis.signature(materialize_empirical(
            cfg.system, w.origin, std::min<long>(w.orbit_length, 200000), ctx.grid)));
    }
  }

  // block-entropy curve for the first typical orbit
  Csv entropy_csv(ctx);
  entropy_csv.raw("k,H_k,slope\n");
  {
    ConjugacyCode code = build_conjugacy(cfg.system);
    OrbitOrigin origin = OrbitOrigin::from_seed(derive_seed(cfg.ensemble.seed, 1000));
    for (int k = 2; k <= opt.block_order; k += 2) {
      try {
        EntropyEstimate e =
            entropy_symbolic(cfg.system, code, origin, opt.orbit_length, k);
        entropy_csv.raw(std::to_string(k) + "," + format_double(e.h_k) + "," +
                        format_double(e.value) + "\n");
      } catch (const std::runtime_error&) {
        break;  // undersampled orders are omitted from the curve
      }
    }
  }
  atomic_write(ctx.outdir / "entropy.csv", entropy_csv.str());

  json j;
  j["system"] = cfg.system.name();
  j["analyses"] = analyses;
  j["ruelle_inequality_holds"] = ruelle_ok;
  j["max_V"] = max_v;
  j["max_V_at"] = argmax;

  if (cfg.equilibrium.large_deviation.enabled && !kr_pool.empty()) {
    const auto& ld = cfg.equilibrium.large_deviation;
    auto probe = large_deviation_probe(cfg.system, ld.r, kr_pool, ld.radius, ld.ns,
                                       ld.samples, derive_seed(cfg.ensemble.seed, 7777),
                                       ctx.basis);
    Csv ld_csv(ctx);
    ld_csv.raw("n,escape_fraction,rate\n");
    for (size_t i = 0; i < probe.ns.size(); ++i)
      ld_csv.raw(std::to_string(probe.ns[i]) + "," +
                 format_double(probe.escape_fraction[i]) + "," +
                 format_double(probe.rate[i]) + "\n");
    atomic_write(ctx.outdir / "large_deviation.csv", ld_csv.str());
    j["large_deviation"] = {{"r", ld.r},
                            {"all_in_neighborhood", probe.all_in_neighborhood},
                            {"consistent", probe.consistent}};
  }
  write_json(ctx, "equilibrium.json", j);
}

void run_gallery(RunContext& ctx) {
  const auto& cfg = ctx.config;
  json j;
  j["system"] = cfg.system.name();
  if (const auto* f = std::get_if<QuadraticFeigenbaum>(&cfg.system.family)) {
    // static reference-measure checks across generations
    json gens = json::array();
    Csv csv(ctx);
    csv.raw("generation,atoms,support_atoms,dist_to_next\n");
    for (int g = 1; g <= f->generation; ++g) {
      ProbMeasure mu = feigenbaum_reference_measure(g);
      auto sup = support_estimate(mu, 1.0 / double(2L << g));
      double dist_next = g < f->generation
                             ? weak_star_dist(mu, feigenbaum_reference_measure(g + 1),
                                              ctx.basis)
                             : 0.0;
      bool mass_ok = std::abs(mu.weights().sum() - 1.0) <= kMassTol &&
                     mu.weights().maxCoeff() == mu.weights().minCoeff();
      gens.push_back({{"generation", g},
                      {"atoms", mu.size()},
                      {"mass_uniform", mass_ok},
                      {"support_atoms", sup.indices.size()}});
      csv.raw(std::to_string(g) + "," + std::to_string(mu.size()) + "," +
              std::to_string(sup.indices.size()) + "," + format_double(dist_next) + "\n");
    }
    atomic_write(ctx.outdir / "feigenbaum_generations.csv", csv.str());
    write_measure_stamped(ctx, ctx.outdir / "feigenbaum_measure.measure",
                          feigenbaum_reference_measure(f->generation));
    j["generations"] = gens;
  } else {
    j["note"] = "see gallery --list for the catalogue; run the per-system pipelines "
                "for quantitative output";
  }
  write_json(ctx, "gallery.json", j);
}

}  // namespace

std::string gallery_listing() {
  std::ostringstream os;
  os << "gallery systems and expected outcomes:\n"
     << "  linear_expanding (g_d)     unique physical measure = Lebesgue; time\n"
     << "                             averages converge Lebesgue-a.e.; PLY residual 0\n"
     << "  perturbed_expanding        expanding, degree d; unique physical measure,\n"
     << "                             absolutely continuous; PLY residual 0\n"
     << "  product_halving            (x,y) -> (x/2,y); observable measures are the\n"
     << "                             deltas on {0} x [0,1]; none is physical\n"
     << "  bowen_saddles oscillating  time averages oscillate along the segment\n"
     << "                             between delta_A and delta_B; one irreducible\n"
     << "                             generalized attractor, no physical measure\n"
     << "  bowen_saddles physical     averages converge to the chosen combination of\n"
     << "                             delta_A, delta_B: a non-ergodic physical measure\n"
     << "  gradient_time_one          sinks accumulating at 0; physical measures are\n"
     << "                             the sink deltas; delta_0 observable, not physical\n"
     << "  quadratic_feigenbaum       static reference measure mu(K_{i,n}) = 2^-n on\n"
     << "                             the generation-n intervals\n"
     << "presets: ";
  auto names = preset_names();
  for (size_t i = 0; i < names.size(); ++i) os << (i ? ", " : "") << names[i];
  os << "\n";
  return os.str();
}

void run_command(const std::string& command, const ExperimentConfig& config) {
  RunContext ctx(config);
  fs::create_directories(ctx.outdir);
  write_manifest(ctx, command);
  if (command == "pomega") run_pomega(ctx);
  else if (command == "observability") run_observability(ctx);
  else if (command == "decompose") run_decompose(ctx);
  else if (command == "equilibrium") run_equilibrium(ctx);
  else if (command == "gallery") run_gallery(ctx);
  else throw ConfigError("unknown command '" + command + "'");
}

}  // namespace ergo
