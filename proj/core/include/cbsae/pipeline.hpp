#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cbsae/area_data.hpp"
#include "cbsae/bootstrap.hpp"
#include "cbsae/config.hpp"
#include "cbsae/estimators.hpp"
#include "cbsae/fay_herriot.hpp"
#include "cbsae/graph_smoothness.hpp"
#include "cbsae/model_selection.hpp"

namespace cbsae {

inline constexpr const char* kVersion = "0.1.0";

enum class Stage { kFit, kCrossValidate, kEstimate, kBootstrap, kRun };

/// Everything a run produced. Numbers come straight from module outputs.
struct EstimateReport {
  std::vector<std::string> labels;
  std::optional<std::vector<std::string>> groups;
  Eigen::VectorXd y;
  Eigen::VectorXd sampling_variance;

  std::optional<PosteriorSummary> posterior;
  Eigen::VectorXd theta_bayes;
  Eigen::VectorXd theta_smoothed;
  /// Present only when a benchmark was configured.
  std::optional<Eigen::VectorXd> theta_benchmarked;
  /// Benchmark without smoothing (gamma = 0), for comparison plots.
  std::optional<Eigen::VectorXd> theta_benchmarked_unsmoothed;
  std::optional<double> constraint_residual;

  double gamma = 0.0;
  std::optional<CvCurve> cv;
  std::optional<BootstrapReport> bootstrap;

  /// Ordered key/value run metadata (seeds, gamma, normalization, version).
  std::vector<std::pair<std::string, std::string>> metadata;

  /// Benchmarked estimate when present, else the smoothed one.
  const Eigen::VectorXd& constrained() const {
    return theta_benchmarked ? *theta_benchmarked : theta_smoothed;
  }
  std::size_t areas() const { return labels.size(); }
};

/// Inputs after loading: dataset, penalty matrix, and resolved benchmark.
struct PreparedProblem {
  AreaDataset data;
  SmoothnessMatrix omega;
  LossWeights phi;
  std::optional<ConstraintSet> constraints;
  std::vector<std::pair<std::string, std::string>> metadata;
};

PreparedProblem prepare_problem(const RunConfig& config);

/// Runs the stages required by `stage` (fit < cv < estimate < bootstrap <
/// run). Errors are rethrown with the failing stage's name prefixed.
EstimateReport run_pipeline(const RunConfig& config, Stage stage = Stage::kRun);
EstimateReport run_pipeline(const PreparedProblem& problem, const RunConfig& config,
                            Stage stage = Stage::kRun);

enum class PlotKind { kScatterConstrainedVsBayes, kScatterByGroup, kMseByArea };

std::optional<PlotKind> parse_plot_kind(std::string_view name);
std::string plot_kind_name(PlotKind kind);

/// Tidy plot table for one figure type; throws ValidationError when the
/// report lacks what the kind needs (groups or bootstrap output).
CsvTable plot_table(const EstimateReport& report, PlotKind kind);
std::filesystem::path emit_plot_data(const EstimateReport& report, PlotKind kind,
                                     const std::filesystem::path& out_dir);

/// Writes the report files for whatever the report contains.
void write_report(const EstimateReport& report, const std::filesystem::path& out_dir);

/// Reads estimates.csv (and bootstrap_mse.csv when present) back from a
/// report directory, for plot-data.
EstimateReport load_report(const std::filesystem::path& dir);

}  // namespace cbsae
