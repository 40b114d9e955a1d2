#include "cbsae/estimators.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "cbsae/error.hpp"

namespace cbsae {

namespace detail {

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw ValidationError(std::string(what) + " has non-finite entries");
  }
}

PenalizedSystem::PenalizedSystem(const Eigen::VectorXd& phi_diag,
                                 const Eigen::MatrixXd& omega, double gamma)
    : phi_(phi_diag) {
  if (omega.rows() != phi_diag.size() || omega.cols() != phi_diag.size()) {
    throw ValidationError("dimension mismatch between weights and smoothness matrix");
  }
  if (!std::isfinite(gamma) || gamma < 0.0) {
    throw ValidationError("smoothing penalty gamma must be finite and >= 0");
  }
  zero_penalty_ = gamma == 0.0 || (omega.array() == 0.0).all();
  Eigen::MatrixXd sigma = gamma * omega;
  sigma.diagonal() += phi_diag;
  llt_.compute(sigma);
  if (llt_.info() != Eigen::Success || !(llt_.rcond() > 1e-15)) {
    throw NumericalError("Phi + gamma*Omega is not positive definite");
  }
}

Eigen::VectorXd PenalizedSystem::solve(const Eigen::VectorXd& rhs) const {
  return llt_.solve(rhs);
}

Eigen::MatrixXd PenalizedSystem::solve(const Eigen::MatrixXd& rhs) const {
  return llt_.solve(rhs);
}

Eigen::VectorXd PenalizedSystem::smoothed(const Eigen::VectorXd& theta) const {
  if (zero_penalty_) return theta;
  return llt_.solve(phi_.cwiseProduct(theta));
}

Eigen::VectorXd PenalizedSystem::benchmarked(const Eigen::VectorXd& theta,
                                             const Eigen::MatrixXd& m,
                                             const Eigen::VectorXd& t) const {
  const Eigen::VectorXd phi_theta = phi_.cwiseProduct(theta);
  const Eigen::MatrixXd sigma_inv_mt = llt_.solve(m.transpose());
  const Eigen::MatrixXd s = m * sigma_inv_mt;  // M Sigma^-1 M'

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kConstraintConditionLimit) {
    throw ValidationError("degenerate or redundant constraints");
  }

  const Eigen::VectorXd gap = t - m * llt_.solve(phi_theta);
  const Eigen::VectorXd lambda = s.ldlt().solve(gap);
  return llt_.solve(phi_theta + m.transpose() * lambda);
}

}  // namespace detail

LossWeights::LossWeights(Eigen::VectorXd phi) : phi_(std::move(phi)) {
  for (Eigen::Index i = 0; i < phi_.size(); ++i) {
    if (!std::isfinite(phi_[i]) || !(phi_[i] > 0.0)) {
      throw ValidationError("loss weight " + std::to_string(i) +
                            " must be finite and > 0");
    }
  }
}

LossWeights LossWeights::ones(std::size_t m) {
  return LossWeights(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m)));
}

ConstraintSet::ConstraintSet(Eigen::MatrixXd m, Eigen::VectorXd t)
    : m_(std::move(m)), t_(std::move(t)) {
  if (m_.rows() < 1) throw ValidationError("constraint set needs k >= 1 rows");
  if (t_.size() != m_.rows()) {
    throw ValidationError("constraint targets must have one entry per row of M");
  }
  if (!m_.allFinite() || !t_.allFinite()) {
    throw ValidationError("constraint set has non-finite entries");
  }
}

ConstraintSet ConstraintSet::single(const Eigen::VectorXd& w, double t) {
  return ConstraintSet(w.transpose(), Eigen::VectorXd::Constant(1, t));
}

double ConstraintSet::residual(const Eigen::VectorXd& delta) const {
  return (m_ * delta - t_).lpNorm<Eigen::Infinity>();
}

double penalized_objective(const Eigen::VectorXd& theta_bayes,
                           const LossWeights& phi, const SmoothnessMatrix& omega,
                           double gamma, const Eigen::VectorXd& delta) {
  const Eigen::VectorXd r = delta - theta_bayes;
  return r.dot(phi.values().cwiseProduct(r)) + gamma * omega.quadratic_form(delta);
}

namespace {

void check_shapes(const Eigen::VectorXd& theta, const LossWeights& phi,
                  const SmoothnessMatrix& omega) {
  detail::check_finite(theta, "Bayes estimate");
  if (phi.size() != static_cast<std::size_t>(theta.size()) ||
      omega.size() != static_cast<std::size_t>(theta.size())) {
    throw ValidationError("dimension mismatch: theta has " +
                          std::to_string(theta.size()) + " entries, Phi " +
                          std::to_string(phi.size()) + ", Omega " +
                          std::to_string(omega.size()));
  }
}

}  // namespace

SmoothedEstimate smoothed_estimate(const Eigen::VectorXd& theta_bayes,
                                   const LossWeights& phi,
                                   const SmoothnessMatrix& omega, double gamma) {
  check_shapes(theta_bayes, phi, omega);
  const detail::PenalizedSystem system(phi.values(), omega.matrix(), gamma);
  SmoothedEstimate out;
  out.values = system.smoothed(theta_bayes);
  out.objective_value =
      penalized_objective(theta_bayes, phi, omega, gamma, out.values);
  return out;
}

BenchmarkedEstimate benchmarked_estimate(const Eigen::VectorXd& theta_bayes,
                                         const LossWeights& phi,
                                         const SmoothnessMatrix& omega,
                                         double gamma,
                                         const ConstraintSet& constraints) {
  check_shapes(theta_bayes, phi, omega);
  if (constraints.dimension() != static_cast<std::size_t>(theta_bayes.size())) {
    throw ValidationError("constraint matrix has " +
                          std::to_string(constraints.dimension()) +
                          " columns, expected " +
                          std::to_string(theta_bayes.size()));
  }
  const detail::PenalizedSystem system(phi.values(), omega.matrix(), gamma);
  BenchmarkedEstimate out;
  out.smoothed = system.smoothed(theta_bayes);
  out.values = system.benchmarked(theta_bayes, constraints.matrix(),
                                  constraints.targets());
  out.objective_value =
      penalized_objective(theta_bayes, phi, omega, gamma, out.values);
  out.constraint_residual = constraints.residual(out.values);
  return out;
}

BenchmarkedEstimate benchmarked_estimate_single(
    const Eigen::VectorXd& theta_bayes, const LossWeights& phi,
    const SmoothnessMatrix& omega, double gamma, const Eigen::VectorXd& w,
    double t) {
  check_shapes(theta_bayes, phi, omega);
  if (w.size() != theta_bayes.size()) {
    throw ValidationError("benchmark weight vector has wrong length");
  }
  detail::check_finite(w, "benchmark weights");
  if (!std::isfinite(t)) throw ValidationError("benchmark target must be finite");
  if ((w.array() < 0.0).any()) {
    throw ValidationError("benchmark weights must be nonnegative");
  }
  if ((w.array() == 0.0).all()) {
    throw ValidationError("benchmark weight vector is zero");
  }
  const detail::PenalizedSystem system(phi.values(), omega.matrix(), gamma);
  BenchmarkedEstimate out;
  out.smoothed = system.smoothed(theta_bayes);
  const Eigen::VectorXd sigma_inv_w = system.solve(w);
  const double scale = w.dot(sigma_inv_w);
  out.values = out.smoothed + ((t - w.dot(out.smoothed)) / scale) * sigma_inv_w;
  out.objective_value =
      penalized_objective(theta_bayes, phi, omega, gamma, out.values);
  out.constraint_residual = std::abs(w.dot(out.values) - t);
  return out;
}

StackedProblem stack_multivariate(const std::vector<ComponentProblem>& parts) {
  if (parts.empty()) throw ValidationError("multivariate stack needs p >= 1");
  const auto m = static_cast<Eigen::Index>(parts.front().theta_bayes.size());
  for (const auto& c : parts) {
    if (c.theta_bayes.size() != m ||
        c.phi.size() != static_cast<std::size_t>(m) ||
        c.omega.size() != static_cast<std::size_t>(m)) {
      throw ValidationError("inconsistent area count across components");
    }
  }
  const auto p = static_cast<Eigen::Index>(parts.size());
  Eigen::VectorXd theta(m * p);
  Eigen::VectorXd phi(m * p);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(m * p, m * p);
  for (Eigen::Index c = 0; c < p; ++c) {
    const auto& part = parts[static_cast<std::size_t>(c)];
    theta.segment(c * m, m) = part.theta_bayes;
    phi.segment(c * m, m) = part.phi.values();
    omega.block(c * m, c * m, m, m) = part.omega.matrix();
  }
  return {static_cast<std::size_t>(m), static_cast<std::size_t>(p),
          std::move(theta), LossWeights(std::move(phi)),
          SmoothnessMatrix(std::move(omega))};
}

std::vector<Eigen::VectorXd> unstack_multivariate(const Eigen::VectorXd& values,
                                                  std::size_t components) {
  const auto p = static_cast<Eigen::Index>(components);
  if (p == 0 || values.size() % p != 0) {
    throw ValidationError("stacked vector length is not a multiple of p");
  }
  const Eigen::Index m = values.size() / p;
  std::vector<Eigen::VectorXd> out;
  out.reserve(components);
  for (Eigen::Index c = 0; c < p; ++c) out.emplace_back(values.segment(c * m, m));
  return out;
}

}  // namespace cbsae
