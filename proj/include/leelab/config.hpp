#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "leelab/fock.hpp"
#include "leelab/manifold.hpp"

namespace leelab {

struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  bool log = false;

  std::vector<double> points() const;
};

struct Truncation {
  double lambda_cutoff = 10.0;
  std::size_t mode_ceiling = kDefaultModeCeiling;
  std::size_t dense_ceiling = 5000;
  std::size_t sector_ceiling = kDefaultSectorCeiling;
  bool prune_uncoupled = true;
};

struct ScanConfig {
  // Spectral-parameter grid for flow scans; defaults to [threshold - 1, threshold - 0.01].
  std::optional<GridSpec> e_grid;
  GridSpec lambda_k{1e2, 1e6, 9, true};
  GridSpec cutoff_sweep{100.0, 1000.0, 12, true};
  GridSpec heat_t{1e-4, 10.0, 200, true};
  // Light-front spectral grid; defaults to 10 points below (n-1) m + mu_p.
  std::optional<GridSpec> lightfront_e;
  std::size_t pair_count = 20;
};

struct OutputConfig {
  std::string directory;  // empty: taken from the environment or the CLI
  std::vector<std::string> formats{"json", "csv"};

  bool csv() const;
};

struct RunConfig {
  ManifoldSpec manifold = ManifoldSpec::torus(2.0 * 3.14159265358979323846,
                                              2.0 * 3.14159265358979323846, 0.0, 0.0);
  ModelParams model;
  Truncation truncation;
  ScanConfig scan;
  OutputConfig output;

  void validate() const;
};

/// Parses a configuration document. Unknown keys, wrong types and invalid
/// values raise ErrorCode::config_error with the line (for syntax errors) or
/// the JSON pointer of the offending field.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical form: every field spelled out, keys sorted.
nlohmann::json to_json(const RunConfig& config);

// FNV-1a over the canonical dump of `key`, as 16 hex digits.
std::string content_hash(const nlohmann::json& key);

}  // namespace leelab
