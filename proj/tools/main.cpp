// cbsae: smoothed and benchmarked small-area estimates from the command line.
//
//   cbsae run --config data/saipe_synthetic.cfg --out out/
//   cbsae plot-data --report out/ --kind scatter_by_group
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbsae/config.hpp"
#include "cbsae/error.hpp"
#include "cbsae/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> gamma;
  std::optional<std::string> gamma_grid;
  std::optional<double> benchmark_target;
  std::optional<int> bootstrap_reps;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
};

void add_run_flags(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "Run configuration (key = value file)")->required();
  sub->add_option("--seed", o.seed, "Master seed");
  auto* g = sub->add_option("--gamma", o.gamma, "Fixed smoothing penalty");
  auto* grid = sub->add_option("--gamma-grid", o.gamma_grid, "CV grid lo,hi,n (log-spaced)");
  g->excludes(grid);
  sub->add_option("--benchmark-target", o.benchmark_target, "Weighted-mean benchmark target t");
  sub->add_option("--bootstrap-reps", o.bootstrap_reps, "Bootstrap replicates B");
  sub->add_option("--out", o.out, "Output directory");
  sub->add_option("--threads", o.threads, "Worker threads for CV and bootstrap");
}

cbsae::RunConfig resolve_config(const Overrides& o) {
  auto cfg = cbsae::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.gamma) {
    cfg.gamma = *o.gamma;
    cfg.gamma_grid.reset();
  }
  if (o.gamma_grid) {
    cfg.gamma_grid = cbsae::parse_gamma_grid(*o.gamma_grid);
    cfg.gamma.reset();
  }
  if (o.benchmark_target) cfg.benchmark_target = *o.benchmark_target;
  if (o.bootstrap_reps) cfg.bootstrap_reps = *o.bootstrap_reps;
  if (o.out) cfg.out_dir = *o.out;
  if (o.threads) cfg.threads = *o.threads;
  cfg.validate();
  return cfg;
}

void print_summary(const cbsae::EstimateReport& r, const std::filesystem::path& out) {
  std::cout << "areas: " << r.areas() << "\n";
  if (r.posterior) {
    std::cout << "sigma_u^2 posterior mean: " << r.posterior->sigma_u2_mean << "\n";
  }
  if (r.cv) std::cout << "gamma_hat (cv): " << r.cv->gamma_hat << "\n";
  if (r.theta_smoothed.size() > 0) std::cout << "gamma used: " << r.gamma << "\n";
  if (r.constraint_residual) {
    std::cout << "benchmark residual: " << *r.constraint_residual << "\n";
  }
  if (r.bootstrap) {
    std::cout << "bootstrap: " << r.bootstrap->successful << " replicates, mean MSE "
              << r.bootstrap->mse.mean() << "\n";
  }
  std::cout << "wrote " << out.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smoothed and benchmarked Bayes small-area estimation"};
  app.require_subcommand(1);

  Overrides o;
  struct Cmd {
    const char* name;
    const char* help;
    cbsae::Stage stage;
  };
  const std::vector<Cmd> commands = {
      {"fit", "Gibbs fit only: posterior means of theta", cbsae::Stage::kFit},
      {"cv", "Leave-one-out cross-validation curve for gamma", cbsae::Stage::kCrossValidate},
      {"estimate", "Smoothed and benchmarked point estimates", cbsae::Stage::kEstimate},
      {"bootstrap", "Point estimates plus residual-bootstrap MSE", cbsae::Stage::kBootstrap},
      {"run", "Everything, including plot data", cbsae::Stage::kRun},
  };
  std::vector<std::pair<CLI::App*, cbsae::Stage>> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_run_flags(sub, o);
    subs.emplace_back(sub, c.stage);
  }

  std::string report_dir;
  std::vector<std::string> kinds;
  std::optional<std::string> plot_out;
  auto* plot = app.add_subcommand("plot-data", "Write plot-ready CSVs from a report directory");
  plot->add_option("--report", report_dir, "Directory written by estimate/bootstrap/run")
      ->required();
  plot->add_option("--kind", kinds,
                   "scatter_constrained_vs_bayes | scatter_by_group | mse_by_area");
  plot->add_option("--out", plot_out, "Output directory (default: the report directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (plot->parsed()) {
      const auto report = cbsae::load_report(report_dir);
      const std::filesystem::path out = plot_out.value_or(report_dir);
      std::vector<cbsae::PlotKind> todo;
      for (const auto& k : kinds) {
        const auto kind = cbsae::parse_plot_kind(k);
        if (!kind) throw cbsae::ValidationError("unknown plot kind \"" + k + "\"");
        todo.push_back(*kind);
      }
      if (todo.empty()) {
        todo.push_back(cbsae::PlotKind::kScatterConstrainedVsBayes);
        if (report.groups) todo.push_back(cbsae::PlotKind::kScatterByGroup);
        if (report.bootstrap) todo.push_back(cbsae::PlotKind::kMseByArea);
      }
      for (const auto k : todo) {
        std::cout << "wrote " << cbsae::emit_plot_data(report, k, out).string() << "\n";
      }
      return kExitOk;
    }

    for (const auto& [sub, stage] : subs) {
      if (!sub->parsed()) continue;
      const auto cfg = resolve_config(o);
      const auto report = cbsae::run_pipeline(cfg, stage);
      cbsae::write_report(report, cfg.out_dir);
      if (stage == cbsae::Stage::kRun) {
        cbsae::emit_plot_data(report, cbsae::PlotKind::kScatterConstrainedVsBayes, cfg.out_dir);
        if (report.groups) {
          cbsae::emit_plot_data(report, cbsae::PlotKind::kScatterByGroup, cfg.out_dir);
        }
        cbsae::emit_plot_data(report, cbsae::PlotKind::kMseByArea, cfg.out_dir);
      }
      print_summary(report, cfg.out_dir);
    }
    return kExitOk;
  } catch (const cbsae::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const cbsae::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
