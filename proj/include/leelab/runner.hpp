#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "leelab/config.hpp"

namespace leelab {

const char* version() noexcept;

// Environment variable consulted for the results directory when neither the
// options nor the config name one.
inline constexpr const char* kOutputDirEnv = "LEELAB_OUTPUT_DIR";

struct RunOptions {
  bool oracle = false;
  bool use_cache = true;
  int threads = 1;
  std::string output_directory;
};

struct RunOutcome {
  std::string command;
  std::string config_hash;
  std::string directory;  // <outdir>/<command>/<hash>
  nlohmann::json payload;
  bool passed = true;
  std::string failure;    // first failed assertion with its numbers
  bool from_cache = false;
};

const std::vector<std::string>& command_names();

/// Runs one command, serving it from the cache when an identical
/// (config, command, oracle flag, version) record exists.
RunOutcome run_command(const std::string& command, const RunConfig& config,
                       const RunOptions& options = {});

}  // namespace leelab
