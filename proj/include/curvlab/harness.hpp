#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "curvlab/textio.hpp"

namespace curvlab {

// Experiment ids the harness accepts, plus the "generate" dataset utility.
const std::vector<std::string>& experiment_ids();

// Runs one experiment: validates the config (unknown keys rejected), loads
// every input before creating any output, then writes the module CSV
// exports, a resolved-config copy and a summary.json into the output
// directory. Returns the summary as a JSON string. Hard errors throw; the
// CLI maps them to a nonzero exit.
std::string run_experiment(const std::string& experiment, const FlatConfig& config,
                           const std::filesystem::path& out_dir);

}  // namespace curvlab
