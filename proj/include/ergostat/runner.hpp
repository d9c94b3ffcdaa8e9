#pragma once

#include <string>

#include "ergostat/config.hpp"

namespace ergo {

extern const char* kVersion;

// Executes one pipeline: "pomega", "observability", "decompose",
// "equilibrium" or "gallery". All outputs land in config.output_directory,
// written atomically and stamped with the manifest hash; identical config
// and seed produce byte-identical outputs for every worker count.
void run_command(const std::string& command, const ExperimentConfig& config);

// The gallery listing (systems and their expected qualitative outcomes).
std::string gallery_listing();

}  // namespace ergo
