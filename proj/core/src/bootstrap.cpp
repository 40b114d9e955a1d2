#include "cbsae/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "cbsae/error.hpp"

namespace cbsae {

Eigen::VectorXd standardized_residuals(const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& theta_bm,
                                       const Eigen::VectorXd& sigma_u) {
  if (y.size() != theta_bm.size() || y.size() != sigma_u.size()) {
    throw ValidationError("standardized_residuals: dimension mismatch");
  }
  for (Eigen::Index i = 0; i < sigma_u.size(); ++i) {
    if (!std::isfinite(sigma_u[i]) || !(sigma_u[i] > 0.0)) {
      throw ValidationError("observation sd for area " + std::to_string(i) +
                            " must be > 0 to standardize its residual");
    }
  }
  return (y - theta_bm).cwiseQuotient(sigma_u);
}

Eigen::VectorXd resample(const Eigen::VectorXd& residuals, CounterRng& rng) {
  const auto m = residuals.size();
  if (m == 0) throw ValidationError("cannot resample an empty residual vector");
  Eigen::VectorXd out(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    out[i] = residuals[static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m)))];
  }
  return out;
}

BootstrapReport bootstrap_mse(const Eigen::VectorXd& y, const Eigen::VectorXd& theta_bm,
                              const Eigen::VectorXd& sigma_u, const ReplicateFit& fit,
                              const BootstrapConfig& config) {
  if (config.replicates < 1) throw ValidationError("bootstrap needs B >= 1");
  const Eigen::VectorXd resid = standardized_residuals(y, theta_bm, sigma_u);
  const auto m = y.size();
  const auto b_count = static_cast<std::size_t>(config.replicates);

  BootstrapReport report;
  report.replicates = Eigen::MatrixXd::Constant(
      config.replicates, m, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> ok(b_count, 0);

  auto run_one = [&](std::size_t b) {
    CounterRng rng(resample_seed(config.seed, b));
    const Eigen::VectorXd y_star = theta_bm + sigma_u.cwiseProduct(resample(resid, rng));
    try {
      const Eigen::VectorXd est = fit(y_star, fit_seed(config.seed, b));
      if (est.size() == m && est.allFinite()) {
        report.replicates.row(static_cast<Eigen::Index>(b)) = est.transpose();
        ok[b] = 1;
      }
    } catch (const std::exception&) {
      // recorded as failed below
    }
  };

  const unsigned threads =
      std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(b_count)));
  if (threads == 1) {
    for (std::size_t b = 0; b < b_count; ++b) run_one(b);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t b = w; b < b_count; b += threads) run_one(b);
      });
    }
  }

  for (std::size_t b = 0; b < b_count; ++b) {
    if (!ok[b]) report.failed.push_back(b);
  }
  report.successful = b_count - report.failed.size();
  if (report.successful == 0 ||
      static_cast<double>(report.failed.size()) >
          config.max_failure_fraction * static_cast<double>(b_count)) {
    throw NumericalError(std::to_string(report.failed.size()) + " of " +
                         std::to_string(b_count) + " bootstrap replicates failed");
  }

  const double count = static_cast<double>(report.successful);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
  for (std::size_t b = 0; b < b_count; ++b) {
    if (ok[b]) mean += report.replicates.row(static_cast<Eigen::Index>(b)).transpose();
  }
  mean /= count;
  report.mse = Eigen::VectorXd::Zero(m);
  report.variance = Eigen::VectorXd::Zero(m);
  for (std::size_t b = 0; b < b_count; ++b) {
    if (!ok[b]) continue;
    const Eigen::VectorXd row = report.replicates.row(static_cast<Eigen::Index>(b)).transpose();
    report.mse += (row - theta_bm).cwiseAbs2();
    report.variance += (row - mean).cwiseAbs2();
  }
  report.mse /= count;
  report.variance /= count;
  report.bias = mean - theta_bm;
  return report;
}

}  // namespace cbsae
