// Experiment runner: computes empirical-measure statistics, observability
// profiles, basin decompositions and equilibrium-state residuals for the
// built-in gallery of dynamical systems.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "ergostat/runner.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string preset_name;
  std::string out_override;
};

ergo::ExperimentConfig resolve_config(const CommonOpts& opts) {
  if (opts.config_path.empty() && opts.preset_name.empty())
    throw ergo::ConfigError("provide --config <file> or --preset <name>");
  ergo::ExperimentConfig cfg = !opts.config_path.empty()
                                   ? ergo::load_config_file(opts.config_path)
                                   : ergo::preset(opts.preset_name);
  if (!opts.out_override.empty()) cfg.output_directory = opts.out_override;
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config file (JSON)");
  cmd->add_option("--preset", opts.preset_name, "built-in preset name");
  cmd->add_option("--out", opts.out_override, "output directory override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ergostat: statistics of time averages for dynamical systems"};
  app.require_subcommand(1);

  CommonOpts opts;
  const char* names[] = {"pomega", "observability", "decompose", "equilibrium"};
  const char* descs[] = {
      "empirical measure sequence and pw-limit estimate of one orbit",
      "observability sizes, epsilon-basins and the observable-set estimate",
      "decomposition into generalized attractors with the lattice analysis",
      "PLY residuals, Ruelle check and equilibrium-state candidacy"};
  for (int i = 0; i < 4; ++i) add_common(app.add_subcommand(names[i], descs[i]), opts);

  auto* gallery = app.add_subcommand("gallery", "the systems catalogue and example checks");
  bool list_only = false;
  gallery->add_flag("--list", list_only, "print the catalogue and exit");
  add_common(gallery, opts);

  auto* preset_cmd = app.add_subcommand("preset", "materialize a preset config");
  std::string preset_name, write_path;
  preset_cmd->add_option("--name", preset_name, "preset name")->required();
  preset_cmd->add_option("--write", write_path, "write the config JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gallery->parsed() && list_only) {
      std::cout << ergo::gallery_listing();
      return 0;
    }
    if (preset_cmd->parsed()) {
      ergo::ExperimentConfig cfg = ergo::preset(preset_name);
      std::string dump = ergo::config_to_json(cfg).dump(2) + "\n";
      if (write_path.empty()) {
        std::cout << dump;
      } else {
        std::ofstream os(write_path);
        if (!os) throw std::runtime_error("cannot write " + write_path);
        os << dump;
      }
      return 0;
    }
    for (auto* sub : app.get_subcommands()) {
      ergo::ExperimentConfig cfg = resolve_config(opts);
      std::string command = sub->get_name();
      if (command == "gallery" && cfg.command == "gallery") {
        // presets that exist for their static checks run through gallery
      }
      ergo::run_command(command, cfg);
      std::cout << command << ": outputs written to " << cfg.output_directory << "\n";
    }
    return 0;
  } catch (const ergo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "compute error: " << e.what() << "\n";
    return 3;
  }
}
