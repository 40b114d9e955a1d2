#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cbsae/area_data.hpp"

namespace cbsae {

struct GibbsConfig {
  int n_iter = 10'000;
  int n_burn = 2'000;
  int thin = 1;
  std::uint64_t seed = 0;
  /// Holds sigma_u^2 at this value instead of sampling it.
  std::optional<double> fixed_sigma_u2;
};

/// Posterior summaries from one chain. Draw matrices are (retained draws) x
/// (dimension).
struct PosteriorSummary {
  Eigen::VectorXd theta_bayes;
  Eigen::MatrixXd theta_draws;
  Eigen::VectorXd theta_sd;
  Eigen::VectorXd theta_ess;
  Eigen::VectorXd theta_mcse;

  Eigen::VectorXd beta_mean;
  Eigen::VectorXd beta_sd;
  Eigen::MatrixXd beta_draws;

  double sigma_u2_mean = 0.0;
  Eigen::VectorXd sigma_u2_draws;

  std::uint64_t seed = 0;
};

inline constexpr double kSigmaU2Floor = 1e-12;

/// Systematic-scan Gibbs sampler for
///   y_i | theta_i ~ N(theta_i, D_i),  theta_i | beta ~ N(x_i' beta, sigma_u^2),
///   pi(sigma_u^2, beta) ∝ 1,
/// updating theta, then beta, then sigma_u^2 from their conjugate conditionals.
/// Requires m > p + 2 and full-column-rank X. Deterministic given the seed.
PosteriorSummary gibbs_fit(const AreaDataset& data, const GibbsConfig& config);

/// Column means of a draw matrix. Throws on an empty draw set.
Eigen::VectorXd posterior_mean(const Eigen::MatrixXd& draws);

/// Effective sample size of one chain by Geyer's initial monotone sequence.
double effective_sample_size(const Eigen::Ref<const Eigen::VectorXd>& chain);

}  // namespace cbsae
