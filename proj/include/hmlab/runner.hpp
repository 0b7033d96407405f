#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hmlab/error.hpp"
#include "hmlab/scenario.hpp"

namespace hmlab {

inline constexpr const char* kToolVersion = "1.0.0";

struct RunOptions {
  std::optional<std::string> output_dir;               // overrides the config and env
  std::optional<std::vector<std::string>> experiments; // overrides the config list
  int threads = 1;
};

struct RunResult {
  int exit_code = 0;
  std::string output_dir;
  std::vector<std::string> files;   // relative to output_dir, manifest excluded
  std::string error;
};

/// 0 success, 2 configuration or hypothesis rejection, 3 numerical failure.
int exit_code_for(ErrorCode code);

/// Output directory: explicit override, else $HMLAB_OUTPUT_ROOT/<output_dir>
/// when the variable is set, else <output_dir>.
std::string resolve_output_dir(const Scenario& scenario, const RunOptions& options);

/// Runs the requested experiments in their fixed order and writes
/// manifest.json (config echo, version, seed, threads, wall time, status and
/// the SHA-256 of every other output). Never throws for library errors; the
/// failure is reported through the exit code and the manifest.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});
RunResult run_scenario_file(const std::string& config_path, const RunOptions& options = {});

}  // namespace hmlab
