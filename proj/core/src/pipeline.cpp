#include "cbsae/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <type_traits>

#include "cbsae/error.hpp"
#include "cbsae/io.hpp"
#include "cbsae/random.hpp"

namespace cbsae {

namespace {

// Runs `body`, prefixing any error with the stage name while keeping its type.
template <typename F>
auto in_stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(name) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(name) + ": " + e.what());
  }
}

std::string policy_name(GammaPolicy p) {
  return p == GammaPolicy::kFixed ? "fixed" : "recv";
}

bool single_weight_benchmark(const ConstraintSet& c) {
  return c.count() == 1 && (c.matrix().array() >= 0.0).all();
}

struct Fitted {
  Eigen::VectorXd smoothed;
  std::optional<Eigen::VectorXd> benchmarked;
  std::optional<double> residual;
};

// Smoothing then (optional) benchmarking at a given gamma.
Fitted constrain(const PreparedProblem& prob, const Eigen::VectorXd& theta, double gamma) {
  Fitted out;
  if (!prob.constraints) {
    out.smoothed = smoothed_estimate(theta, prob.phi, prob.omega, gamma).values;
    return out;
  }
  const auto& c = *prob.constraints;
  const auto est = single_weight_benchmark(c)
                       ? benchmarked_estimate_single(theta, prob.phi, prob.omega, gamma,
                                                     c.matrix().row(0).transpose(),
                                                     c.targets()[0])
                       : benchmarked_estimate(theta, prob.phi, prob.omega, gamma, c);
  const double bound = 1e-8 * (1.0 + c.targets().lpNorm<Eigen::Infinity>());
  if (!(est.constraint_residual <= bound)) {
    throw NumericalError("benchmark residual " + format_double(est.constraint_residual) +
                         " exceeds " + format_double(bound));
  }
  out.smoothed = est.smoothed;
  out.benchmarked = est.values;
  out.residual = est.constraint_residual;
  return out;
}

}  // namespace

PreparedProblem prepare_problem(const RunConfig& config) {
  config.validate();
  PreparedProblem prob;
  prob.data = in_stage("load", [&] { return load_area_csv(config.area_csv, config.schema); });
  const auto& data = prob.data;

  prob.omega = in_stage("adjacency", [&] {
    return build_omega(load_adjacency(read_edge_list(config.edge_list), data.labels));
  });

  prob.phi = in_stage("weights", [&] {
    if (data.loss_weights) {
      prob.metadata.emplace_back("loss_weights", "column:" + *config.schema.loss_weight);
      return LossWeights(*data.loss_weights);
    }
    for (std::size_t i = 0; i < data.areas(); ++i) {
      if (!(data.sampling_variance[static_cast<Eigen::Index>(i)] > 0.0)) {
        throw ValidationError("area " + data.labels[i] +
                              " has D = 0; default weights 1/D need D > 0 (supply phi_column)");
      }
    }
    prob.metadata.emplace_back("loss_weights", "inverse_D");
    return LossWeights(data.sampling_variance.cwiseInverse());
  });

  in_stage("benchmark", [&] {
    if (config.constraints_file) {
      prob.constraints = read_constraints(*config.constraints_file, data.labels);
      prob.metadata.emplace_back("benchmark_mode", "constraints_file");
      prob.metadata.emplace_back("benchmark_constraints",
                                 std::to_string(prob.constraints->count()));
    } else if (config.benchmark_target) {
      const Eigen::VectorXd& w = *data.benchmark_weights;
      if ((w.array() < 0.0).any()) throw ValidationError("benchmark weights must be >= 0");
      const double total = w.sum();
      if (!(total > 0.0)) throw ValidationError("benchmark weights sum to zero");
      prob.constraints = ConstraintSet::single(w / total, *config.benchmark_target);
      prob.metadata.emplace_back("benchmark_mode", "weighted_mean");
      prob.metadata.emplace_back("benchmark_weight_column", *config.schema.benchmark_weight);
      prob.metadata.emplace_back("benchmark_weight_sum_before_normalization",
                                 format_double(total));
      prob.metadata.emplace_back("benchmark_target", format_double(*config.benchmark_target));
    } else {
      prob.metadata.emplace_back("benchmark_mode", "none");
    }
    if (!config.benchmark_target_source.empty()) {
      prob.metadata.emplace_back("benchmark_target_source", config.benchmark_target_source);
    }
  });
  return prob;
}

EstimateReport run_pipeline(const RunConfig& config, Stage stage) {
  return run_pipeline(prepare_problem(config), config, stage);
}

EstimateReport run_pipeline(const PreparedProblem& prob, const RunConfig& config,
                            Stage stage) {
  config.validate();
  const auto& data = prob.data;
  EstimateReport report;
  report.labels = data.labels;
  report.groups = data.groups;
  report.y = data.y;
  report.sampling_variance = data.sampling_variance;

  auto& meta = report.metadata;
  meta.emplace_back("version", kVersion);
  meta.emplace_back("master_seed", std::to_string(config.seed));
  meta.emplace_back("areas", std::to_string(data.areas()));
  meta.insert(meta.end(), prob.metadata.begin(), prob.metadata.end());

  GibbsConfig gibbs = config.gibbs;
  gibbs.seed = derive_seed(config.seed, 0);
  meta.emplace_back("gibbs_seed", std::to_string(gibbs.seed));
  meta.emplace_back("gibbs_iter", std::to_string(gibbs.n_iter));
  meta.emplace_back("gibbs_burn", std::to_string(gibbs.n_burn));
  meta.emplace_back("gibbs_thin", std::to_string(gibbs.thin));

  report.posterior = in_stage("fit", [&] { return gibbs_fit(data, gibbs); });
  report.theta_bayes = report.posterior->theta_bayes;
  meta.emplace_back("sigma_u2_mean", format_double(report.posterior->sigma_u2_mean));
  for (std::size_t k = 0; k < data.covariate_names.size(); ++k) {
    meta.emplace_back("beta_mean[" + data.covariate_names[k] + "]",
                      format_double(report.posterior->beta_mean[static_cast<Eigen::Index>(k)]));
  }
  if (stage == Stage::kFit) return report;

  const auto grid_spec = config.effective_grid();
  const bool use_cv = !config.gamma.has_value();
  if (stage == Stage::kCrossValidate && !use_cv) {
    throw ValidationError("cv: a gamma grid is required (fixed gamma was given)");
  }
  const auto grid = use_cv ? log_grid(grid_spec.lo, grid_spec.hi, grid_spec.n)
                           : std::vector<double>{};
  if (use_cv) {
    report.cv = in_stage("cv", [&] {
      return cross_validate(report.theta_bayes, prob.phi, prob.omega, grid,
                            prob.constraints, config.threads);
    });
    report.gamma = report.cv->gamma_hat;
    meta.emplace_back("gamma_mode", "cv");
    meta.emplace_back("gamma_grid", format_double(grid_spec.lo) + "," +
                                        format_double(grid_spec.hi) + "," +
                                        std::to_string(grid_spec.n));
    meta.emplace_back("cv_infeasible_points", std::to_string(report.cv->infeasible.size()));
  } else {
    report.gamma = *config.gamma;
    meta.emplace_back("gamma_mode", "fixed");
  }
  meta.emplace_back("gamma", format_double(report.gamma));
  if (stage == Stage::kCrossValidate) return report;

  in_stage("estimate", [&] {
    const auto fitted = constrain(prob, report.theta_bayes, report.gamma);
    report.theta_smoothed = fitted.smoothed;
    report.theta_benchmarked = fitted.benchmarked;
    report.constraint_residual = fitted.residual;
    if (prob.constraints) {
      report.theta_benchmarked_unsmoothed = *constrain(prob, report.theta_bayes, 0.0).benchmarked;
      meta.emplace_back("constraint_residual", format_double(*fitted.residual));
      meta.emplace_back("benchmark_path", single_weight_benchmark(*prob.constraints)
                                              ? "single" : "general");
    }
  });
  if (stage == Stage::kEstimate) return report;

  BootstrapConfig boot;
  boot.replicates = config.bootstrap_reps;
  boot.seed = derive_seed(config.seed, 1);
  boot.gamma_policy = config.bootstrap_gamma_policy;
  boot.threads = config.threads;
  meta.emplace_back("bootstrap_seed", std::to_string(boot.seed));
  meta.emplace_back("bootstrap_reps", std::to_string(boot.replicates));
  meta.emplace_back("bootstrap_gamma_policy", policy_name(boot.gamma_policy));

  report.bootstrap = in_stage("bootstrap", [&] {
    const Eigen::VectorXd sigma_u = data.sampling_variance.cwiseSqrt();
    const bool recv = use_cv && boot.gamma_policy == GammaPolicy::kReCrossValidate;
    const double gamma_hat = report.gamma;
    ReplicateFit fit = [&, recv, gamma_hat](const Eigen::VectorXd& y_star,
                                            std::uint64_t seed) {
      GibbsConfig g = gibbs;
      g.seed = seed;
      const auto post = gibbs_fit(data.with_response(y_star), g);
      double gamma = gamma_hat;
      if (recv) {
        gamma = cross_validate(post.theta_bayes, prob.phi, prob.omega, grid,
                               prob.constraints).gamma_hat;
      }
      auto fitted = constrain(prob, post.theta_bayes, gamma);
      return fitted.benchmarked ? *fitted.benchmarked : fitted.smoothed;
    };
    return bootstrap_mse(data.y, report.constrained(), sigma_u, fit, boot);
  });
  meta.emplace_back("bootstrap_failed", std::to_string(report.bootstrap->failed.size()));
  return report;
}

std::optional<PlotKind> parse_plot_kind(std::string_view name) {
  if (name == "scatter_constrained_vs_bayes") return PlotKind::kScatterConstrainedVsBayes;
  if (name == "scatter_by_group") return PlotKind::kScatterByGroup;
  if (name == "mse_by_area") return PlotKind::kMseByArea;
  return std::nullopt;
}

std::string plot_kind_name(PlotKind kind) {
  switch (kind) {
    case PlotKind::kScatterConstrainedVsBayes: return "scatter_constrained_vs_bayes";
    case PlotKind::kScatterByGroup: return "scatter_by_group";
    case PlotKind::kMseByArea: return "mse_by_area";
  }
  return "unknown";
}

CsvTable plot_table(const EstimateReport& report, PlotKind kind) {
  if (report.theta_smoothed.size() == 0) {
    throw ValidationError("plot-data: report has no point estimates");
  }
  const auto m = report.areas();
  CsvTable t;
  switch (kind) {
    case PlotKind::kScatterConstrainedVsBayes: {
      t.header = {"label", "bayes", "constrained"};
      const auto& c = report.constrained();
      for (std::size_t i = 0; i < m; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        t.rows.push_back({report.labels[i], format_double(report.theta_bayes[r]),
                          format_double(c[r])});
      }
      break;
    }
    case PlotKind::kScatterByGroup: {
      if (!report.groups) {
        throw ValidationError("plot-data: scatter_by_group needs group labels");
      }
      t.header = {"label", "group", "series", "bayes", "constrained"};
      std::vector<std::pair<std::string, const Eigen::VectorXd*>> series;
      if (report.theta_benchmarked) {
        series.emplace_back("benchmarked", &*report.theta_benchmarked_unsmoothed);
        series.emplace_back("smoothed_benchmarked", &*report.theta_benchmarked);
      } else {
        series.emplace_back("smoothed", &report.theta_smoothed);
      }
      for (const auto& [name, values] : series) {
        for (std::size_t i = 0; i < m; ++i) {
          const auto r = static_cast<Eigen::Index>(i);
          t.rows.push_back({report.labels[i], (*report.groups)[i], name,
                            format_double(report.theta_bayes[r]),
                            format_double((*values)[r])});
        }
      }
      break;
    }
    case PlotKind::kMseByArea: {
      if (!report.bootstrap) {
        throw ValidationError("plot-data: mse_by_area needs bootstrap results");
      }
      const auto& b = *report.bootstrap;
      t.header = {"label"};
      if (report.groups) t.header.push_back("group");
      t.header.insert(t.header.end(), {"mse", "bias", "variance"});
      for (std::size_t i = 0; i < m; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        std::vector<std::string> row{report.labels[i]};
        if (report.groups) row.push_back((*report.groups)[i]);
        row.insert(row.end(), {format_double(b.mse[r]), format_double(b.bias[r]),
                               format_double(b.variance[r])});
        t.rows.push_back(std::move(row));
      }
      break;
    }
  }
  return t;
}

std::filesystem::path emit_plot_data(const EstimateReport& report, PlotKind kind,
                                     const std::filesystem::path& out_dir) {
  auto table = plot_table(report, kind);
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / ("plot_" + plot_kind_name(kind) + ".csv");
  write_csv(path, table);
  return path;
}

void write_report(const EstimateReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto m = report.areas();

  if (report.posterior) {
    const auto& p = *report.posterior;
    CsvTable t;
    t.header = {"label", "y", "D", "theta_bayes", "theta_sd", "ess", "mcse"};
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      t.rows.push_back({report.labels[i], format_double(report.y[r]),
                        format_double(report.sampling_variance[r]),
                        format_double(p.theta_bayes[r]), format_double(p.theta_sd[r]),
                        format_double(p.theta_ess[r]), format_double(p.theta_mcse[r])});
    }
    write_csv(out_dir / "posterior.csv", t);
  }

  if (report.cv) {
    CsvTable t;
    t.header = {"gamma", "score"};
    for (std::size_t k = 0; k < report.cv->grid.size(); ++k) {
      t.rows.push_back({format_double(report.cv->grid[k]),
                        format_double(report.cv->scores[k])});
    }
    write_csv(out_dir / "cv_curve.csv", t);
  }

  if (report.theta_smoothed.size() > 0) {
    CsvTable t;
    t.header = {"label", "group", "y", "D", "theta_bayes", "theta_smoothed",
                "theta_benchmarked", "theta_benchmarked_unsmoothed", "theta_constrained"};
    const auto& c = report.constrained();
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      auto opt = [r](const std::optional<Eigen::VectorXd>& v) {
        return v ? format_double((*v)[r]) : std::string();
      };
      t.rows.push_back({report.labels[i], report.groups ? (*report.groups)[i] : "",
                        format_double(report.y[r]), format_double(report.sampling_variance[r]),
                        format_double(report.theta_bayes[r]),
                        format_double(report.theta_smoothed[r]),
                        opt(report.theta_benchmarked), opt(report.theta_benchmarked_unsmoothed),
                        format_double(c[r])});
    }
    write_csv(out_dir / "estimates.csv", t);
  }

  if (report.bootstrap) {
    const auto& b = *report.bootstrap;
    CsvTable t;
    t.header = {"label", "mse", "bias", "variance"};
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      t.rows.push_back({report.labels[i], format_double(b.mse[r]), format_double(b.bias[r]),
                        format_double(b.variance[r])});
    }
    write_csv(out_dir / "bootstrap_mse.csv", t);

    CsvTable reps;
    reps.header = {"replicate"};
    reps.header.insert(reps.header.end(), report.labels.begin(), report.labels.end());
    for (Eigen::Index k = 0; k < b.replicates.rows(); ++k) {
      std::vector<std::string> row{std::to_string(k)};
      for (Eigen::Index i = 0; i < b.replicates.cols(); ++i) {
        row.push_back(format_double(b.replicates(k, i)));
      }
      reps.rows.push_back(std::move(row));
    }
    write_csv(out_dir / "bootstrap_replicates.csv", reps);
  }

  CsvTable meta;
  meta.header = {"key", "value"};
  for (const auto& [k, v] : report.metadata) meta.rows.push_back({k, v});
  write_csv(out_dir / "metadata.csv", meta);
}

EstimateReport load_report(const std::filesystem::path& dir) {
  const auto est = read_csv(dir / "estimates.csv");
  const auto source = (dir / "estimates.csv").string();
  auto col = [&](const CsvTable& t, const char* name, const std::string& src) {
    const auto c = t.column(name);
    if (!c) throw ValidationError(src + ": missing column \"" + name + "\"");
    return *c;
  };
  const auto m = static_cast<Eigen::Index>(est.rows.size());
  EstimateReport r;
  r.y.resize(m);
  r.sampling_variance.resize(m);
  r.theta_bayes.resize(m);
  r.theta_smoothed.resize(m);
  const auto c_label = col(est, "label", source);
  const auto c_group = col(est, "group", source);
  const auto c_bench = col(est, "theta_benchmarked", source);
  const auto c_unsmoothed = col(est, "theta_benchmarked_unsmoothed", source);

  auto num = [&](const CsvTable& t, Eigen::Index row, std::size_t c, const std::string& src) {
    const auto& cell = t.rows[static_cast<std::size_t>(row)][c];
    const auto v = parse_double(cell);
    if (!v) {
      throw ValidationError(src + ": non-numeric value \"" + cell + "\" at row " +
                            std::to_string(row + 1) + ", column \"" + t.header[c] + "\"");
    }
    return *v;
  };
  const bool any_group = std::any_of(est.rows.begin(), est.rows.end(),
                                     [&](const auto& row) { return !row[c_group].empty(); });
  const bool has_bench = m > 0 && !est.rows[0][c_bench].empty();
  if (any_group) r.groups = std::vector<std::string>();
  if (has_bench) {
    r.theta_benchmarked = Eigen::VectorXd(m);
    r.theta_benchmarked_unsmoothed = Eigen::VectorXd(m);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = est.rows[static_cast<std::size_t>(i)];
    r.labels.push_back(row[c_label]);
    if (any_group) r.groups->push_back(row[c_group]);
    r.y[i] = num(est, i, col(est, "y", source), source);
    r.sampling_variance[i] = num(est, i, col(est, "D", source), source);
    r.theta_bayes[i] = num(est, i, col(est, "theta_bayes", source), source);
    r.theta_smoothed[i] = num(est, i, col(est, "theta_smoothed", source), source);
    if (has_bench) {
      (*r.theta_benchmarked)[i] = num(est, i, c_bench, source);
      (*r.theta_benchmarked_unsmoothed)[i] = num(est, i, c_unsmoothed, source);
    }
  }

  const auto mse_path = dir / "bootstrap_mse.csv";
  if (std::filesystem::exists(mse_path)) {
    const auto t = read_csv(mse_path);
    const auto src = mse_path.string();
    if (static_cast<Eigen::Index>(t.rows.size()) != m) {
      throw ValidationError(src + ": row count does not match estimates.csv");
    }
    BootstrapReport b;
    b.mse.resize(m);
    b.bias.resize(m);
    b.variance.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t.rows[static_cast<std::size_t>(i)][col(t, "label", src)] !=
          r.labels[static_cast<std::size_t>(i)]) {
        throw ValidationError(src + ": label order does not match estimates.csv");
      }
      b.mse[i] = num(t, i, col(t, "mse", src), src);
      b.bias[i] = num(t, i, col(t, "bias", src), src);
      b.variance[i] = num(t, i, col(t, "variance", src), src);
    }
    r.bootstrap = std::move(b);
  }
  return r;
}

}  // namespace cbsae
