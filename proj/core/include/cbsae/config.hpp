#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cbsae/bootstrap.hpp"
#include "cbsae/fay_herriot.hpp"
#include "cbsae/io.hpp"

namespace cbsae {

struct GammaGridSpec {
  double lo = 1e-4;
  double hi = 1e2;
  std::size_t n = 40;
};

/// Everything a pipeline run needs. Paths are stored as given; relative paths
/// in a config file are resolved against the file's directory.
struct RunConfig {
  std::filesystem::path area_csv;
  std::filesystem::path edge_list;
  AreaSchema schema;

  // Benchmark: a weight column plus target, or a general constraint file.
  std::optional<double> benchmark_target;
  std::string benchmark_target_source;
  std::optional<std::filesystem::path> constraints_file;

  // Exactly one of these drives gamma.
  std::optional<double> gamma;
  std::optional<GammaGridSpec> gamma_grid;

  GibbsConfig gibbs;
  int bootstrap_reps = 200;
  GammaPolicy bootstrap_gamma_policy = GammaPolicy::kFixed;
  unsigned threads = 1;

  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;

  /// Cross-field checks (one gamma mode, at most one benchmark mode, finite
  /// target). Throws ValidationError.
  void validate() const;

  /// The grid actually searched (default grid when neither mode is set).
  GammaGridSpec effective_grid() const { return gamma_grid.value_or(GammaGridSpec{}); }
};

/// Flat `key = value` text; `#` comments; unknown keys are errors.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                       const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// `lo,hi,n`
GammaGridSpec parse_gamma_grid(std::string_view text);

/// Every recognised key, in documentation order.
const std::vector<std::string>& config_keys();

}  // namespace cbsae
