#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "cbsae/random.hpp"

namespace cbsae {

enum class GammaPolicy {
  kFixed,            // reuse the original gamma_hat in every replicate
  kReCrossValidate,  // rerun cross-validation inside each replicate
};

struct BootstrapConfig {
  int replicates = 200;
  std::uint64_t seed = 0;
  GammaPolicy gamma_policy = GammaPolicy::kFixed;
  unsigned threads = 1;
  double max_failure_fraction = 0.05;
};

/// Re-runs the whole estimation on a synthetic response; gets the seed to use
/// for its own stochastic stages (the Gibbs chain).
using ReplicateFit = std::function<Eigen::VectorXd(const Eigen::VectorXd& y_star,
                                                   std::uint64_t fit_seed)>;

struct BootstrapReport {
  Eigen::VectorXd mse;       // (1/B') sum_b (theta*_b - theta)^2
  Eigen::VectorXd bias;      // mean_b theta*_b - theta
  Eigen::VectorXd variance;  // (1/B') sum_b (theta*_b - mean_b theta*_b)^2
  Eigen::MatrixXd replicates;              // B x m; failed rows are NaN
  std::vector<std::size_t> failed;         // indices of failed replicates
  std::size_t successful = 0;              // B' = B - |failed|
};

/// (y_i - theta_i) / sigma_i. Throws ValidationError when any sigma_i <= 0.
Eigen::VectorXd standardized_residuals(const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& theta_bm,
                                       const Eigen::VectorXd& sigma_u);

// Stream contract: replicate b resamples from CounterRng(resample_seed(s, b))
// and passes fit_seed(s, b) to the replicate fit.
inline constexpr std::uint64_t resample_seed(std::uint64_t master, std::uint64_t b) {
  return derive_seed(master, 2 * b);
}
inline constexpr std::uint64_t fit_seed(std::uint64_t master, std::uint64_t b) {
  return derive_seed(master, 2 * b + 1);
}

/// m i.i.d. draws, uniform over the entries of `residuals`.
Eigen::VectorXd resample(const Eigen::VectorXd& residuals, CounterRng& rng);

/// Residual bootstrap around the constrained fit theta_bm:
///   y*_b = theta_bm + sigma_u .* u*_b,  theta*_b = fit(y*_b),
/// with theta_bm treated as the truth for MSE and bias. Replicates whose fit
/// throws are recorded as failed; more than `max_failure_fraction` failures is
/// a NumericalError.
BootstrapReport bootstrap_mse(const Eigen::VectorXd& y, const Eigen::VectorXd& theta_bm,
                              const Eigen::VectorXd& sigma_u, const ReplicateFit& fit,
                              const BootstrapConfig& config);

}  // namespace cbsae
