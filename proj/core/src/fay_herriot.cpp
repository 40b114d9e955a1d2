#include "cbsae/fay_herriot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <string>

#include "cbsae/error.hpp"
#include "cbsae/random.hpp"

namespace cbsae {

void AreaDataset::validate() const {
  const auto m = static_cast<Eigen::Index>(labels.size());
  if (m == 0) throw ValidationError("dataset has no areas");
  if (y.size() != m || sampling_variance.size() != m || covariates.rows() != m) {
    throw ValidationError("dataset columns have inconsistent lengths");
  }
  if (covariates.cols() < 1) throw ValidationError("dataset needs at least one covariate");
  if (static_cast<Eigen::Index>(covariate_names.size()) != covariates.cols()) {
    throw ValidationError("covariate names do not match covariate columns");
  }
  if (!y.allFinite() || !sampling_variance.allFinite() || !covariates.allFinite()) {
    throw ValidationError("dataset has non-finite entries");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (sampling_variance[i] < 0.0) {
      throw ValidationError("negative sampling variance D for area " +
                            labels[static_cast<std::size_t>(i)]);
    }
  }
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) throw ValidationError("duplicate label " + l);
  }
  if (loss_weights && loss_weights->size() != m) {
    throw ValidationError("loss weight column has wrong length");
  }
  if (benchmark_weights && benchmark_weights->size() != m) {
    throw ValidationError("benchmark weight column has wrong length");
  }
  if (groups && static_cast<Eigen::Index>(groups->size()) != m) {
    throw ValidationError("group column has wrong length");
  }
}

AreaDataset AreaDataset::with_response(Eigen::VectorXd new_y) const {
  AreaDataset out = *this;
  out.y = std::move(new_y);
  return out;
}

Eigen::VectorXd posterior_mean(const Eigen::MatrixXd& draws) {
  if (draws.rows() == 0) throw ValidationError("posterior_mean: empty draw set");
  return draws.colwise().mean().transpose();
}

double effective_sample_size(const Eigen::Ref<const Eigen::VectorXd>& chain) {
  const Eigen::Index n = chain.size();
  if (n < 4) return static_cast<double>(n);
  const Eigen::VectorXd centered = chain.array() - chain.mean();
  const double c0 = centered.squaredNorm() / static_cast<double>(n);
  if (!(c0 > 0.0)) return static_cast<double>(n);
  auto rho = [&](Eigen::Index lag) {
    return centered.head(n - lag).dot(centered.tail(n - lag)) /
           (static_cast<double>(n) * c0);
  };
  // Pairs Gamma_k = rho(2k) + rho(2k+1), truncated at the first non-positive
  // pair and forced monotone.
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; 2 * k + 1 < n; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);
    sum += pair;
    prev = pair;
  }
  const double tau = -1.0 + 2.0 * sum;
  return static_cast<double>(n) / std::max(tau, 1.0 / static_cast<double>(n));
}

PosteriorSummary gibbs_fit(const AreaDataset& data, const GibbsConfig& config) {
  data.validate();
  const auto m = static_cast<Eigen::Index>(data.areas());
  const auto p = static_cast<Eigen::Index>(data.predictors());
  if (config.n_iter <= config.n_burn || config.n_burn < 0 || config.thin < 1) {
    throw ValidationError("Gibbs config requires n_iter > n_burn >= 0 and thin >= 1");
  }
  if (m <= p + 2) {
    throw ValidationError("insufficient areas for flat-prior posterior propriety");
  }
  if (config.fixed_sigma_u2 && !(*config.fixed_sigma_u2 > 0.0)) {
    throw ValidationError("fixed sigma_u^2 must be > 0");
  }
  const Eigen::MatrixXd& x = data.covariates;
  const Eigen::VectorXd& y = data.y;
  const Eigen::VectorXd& d = data.sampling_variance;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p) throw ValidationError("covariate matrix X is rank deficient");

  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::LLT<Eigen::MatrixXd> xtx_llt(xtx);
  if (xtx_llt.info() != Eigen::Success) {
    throw NumericalError("X'X is not positive definite");
  }
  const Eigen::MatrixXd xtx_l = xtx_llt.matrixL();

  // Deterministic start: OLS beta, moment-matched sigma_u^2, theta = y.
  Eigen::VectorXd beta = xtx_llt.solve(x.transpose() * y);
  double sigma2 = config.fixed_sigma_u2.value_or(
      std::max(1e-6, (y - x * beta).squaredNorm() / static_cast<double>(m) - d.mean()));
  Eigen::VectorXd theta = y;

  const int retained = (config.n_iter - config.n_burn) / config.thin;
  PosteriorSummary out;
  out.seed = config.seed;
  out.theta_draws.resize(retained, m);
  out.beta_draws.resize(retained, p);
  out.sigma_u2_draws.resize(retained);

  CounterRng rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double ig_shape = static_cast<double>(m) / 2.0 - 1.0;
  std::gamma_distribution<double> gamma(ig_shape, 1.0);

  Eigen::VectorXd z(p);
  int kept = 0;
  for (int iter = 1; iter <= config.n_iter; ++iter) {
    const Eigen::VectorXd fit = x * beta;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (d[i] == 0.0) {
        theta[i] = y[i];
        continue;
      }
      const double precision = 1.0 / d[i] + 1.0 / sigma2;
      const double mean = (y[i] / d[i] + fit[i] / sigma2) / precision;
      theta[i] = mean + normal(rng) / std::sqrt(precision);
    }

    for (Eigen::Index j = 0; j < p; ++j) z[j] = normal(rng);
    beta = xtx_llt.solve(x.transpose() * theta) +
           std::sqrt(sigma2) * xtx_l.transpose().triangularView<Eigen::Upper>().solve(z);

    if (!config.fixed_sigma_u2) {
      const double ss = (theta - x * beta).squaredNorm();
      sigma2 = std::max(kSigmaU2Floor, 0.5 * ss / gamma(rng));
    }

    if (!theta.allFinite() || !beta.allFinite() || !std::isfinite(sigma2)) {
      throw NumericalError("Gibbs sampler produced non-finite values at iteration " +
                           std::to_string(iter));
    }
    if (iter > config.n_burn && (iter - config.n_burn) % config.thin == 0 &&
        kept < retained) {
      out.theta_draws.row(kept) = theta.transpose();
      out.beta_draws.row(kept) = beta.transpose();
      out.sigma_u2_draws[kept] = sigma2;
      ++kept;
    }
  }

  out.theta_bayes = posterior_mean(out.theta_draws);
  out.beta_mean = posterior_mean(out.beta_draws);
  out.sigma_u2_mean = out.sigma_u2_draws.mean();

  auto column_sd = [](const Eigen::MatrixXd& draws) {
    const Eigen::MatrixXd centered = draws.rowwise() - draws.colwise().mean();
    const double denom = std::max<double>(1.0, static_cast<double>(draws.rows() - 1));
    return Eigen::VectorXd((centered.colwise().squaredNorm() / denom).cwiseSqrt().transpose());
  };
  out.theta_sd = column_sd(out.theta_draws);
  out.beta_sd = column_sd(out.beta_draws);
  out.theta_ess.resize(m);
  out.theta_mcse.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    out.theta_ess[i] = effective_sample_size(out.theta_draws.col(i));
    out.theta_mcse[i] = out.theta_sd[i] / std::sqrt(out.theta_ess[i]);
  }
  return out;
}

}  // namespace cbsae
