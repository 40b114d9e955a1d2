#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "cbsae/graph_smoothness.hpp"

namespace cbsae {

/// Diagonal of the loss-weight matrix Phi. Entries strictly positive and finite.
class LossWeights {
 public:
  LossWeights() = default;
  explicit LossWeights(Eigen::VectorXd phi);

  static LossWeights ones(std::size_t m);

  std::size_t size() const { return static_cast<std::size_t>(phi_.size()); }
  const Eigen::VectorXd& values() const { return phi_; }

 private:
  Eigen::VectorXd phi_;
};

/// Linear benchmarks M delta = t with M of shape k x m, k >= 1. Row rank is
/// checked when the constraints are applied, since the condition number that
/// matters is that of M Sigma^-1 M'.
class ConstraintSet {
 public:
  ConstraintSet() = default;
  ConstraintSet(Eigen::MatrixXd m, Eigen::VectorXd t);

  /// w' delta = t.
  static ConstraintSet single(const Eigen::VectorXd& w, double t);

  std::size_t count() const { return static_cast<std::size_t>(m_.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(m_.cols()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  const Eigen::VectorXd& targets() const { return t_; }

  /// ||M delta - t||_inf
  double residual(const Eigen::VectorXd& delta) const;

 private:
  Eigen::MatrixXd m_;
  Eigen::VectorXd t_;
};

struct SmoothedEstimate {
  Eigen::VectorXd values;
  double objective_value = 0.0;
};

struct BenchmarkedEstimate {
  Eigen::VectorXd values;
  double objective_value = 0.0;
  double constraint_residual = 0.0;
  Eigen::VectorXd smoothed;  // the unconstrained minimizer it adjusts
};

/// Condition-number ceiling for M Sigma^-1 M' before constraints are declared
/// degenerate.
inline constexpr double kConstraintConditionLimit = 1e12;

/// (delta - theta)' Phi (delta - theta) + gamma delta' Omega delta
double penalized_objective(const Eigen::VectorXd& theta_bayes,
                           const LossWeights& phi, const SmoothnessMatrix& omega,
                           double gamma, const Eigen::VectorXd& delta);

/// Minimizer of the penalized objective: solves (Phi + gamma Omega) delta =
/// Phi theta by Cholesky factorization.
SmoothedEstimate smoothed_estimate(const Eigen::VectorXd& theta_bayes,
                                   const LossWeights& phi,
                                   const SmoothnessMatrix& omega, double gamma);

/// Minimizer of the penalized objective subject to M delta = t:
///   Sigma^-1 [Phi theta + M' (M Sigma^-1 M')^-1 (t - M Sigma^-1 Phi theta)],
/// Sigma = Phi + gamma Omega. Throws ValidationError("degenerate or redundant
/// constraints") when M Sigma^-1 M' is numerically singular.
BenchmarkedEstimate benchmarked_estimate(const Eigen::VectorXd& theta_bayes,
                                         const LossWeights& phi,
                                         const SmoothnessMatrix& omega,
                                         double gamma,
                                         const ConstraintSet& constraints);

/// One weighted-mean benchmark w' delta = t, via
///   theta_S + (t - w' theta_S) (w' Sigma^-1 w)^-1 Sigma^-1 w.
/// `w` must be nonnegative and not identically zero.
BenchmarkedEstimate benchmarked_estimate_single(
    const Eigen::VectorXd& theta_bayes, const LossWeights& phi,
    const SmoothnessMatrix& omega, double gamma, const Eigen::VectorXd& w,
    double t);

// Multivariate parameters: p components over the same m areas.

struct ComponentProblem {
  Eigen::VectorXd theta_bayes;
  LossWeights phi;
  SmoothnessMatrix omega;
};

/// Component-major stacking (theta_11..theta_m1, ..., theta_1p..theta_mp) with
/// diagonal Phi and block-diagonal Omega, one m x m block per component.
struct StackedProblem {
  std::size_t areas = 0;
  std::size_t components = 0;
  Eigen::VectorXd theta_bayes;
  LossWeights phi;
  SmoothnessMatrix omega;
};

StackedProblem stack_multivariate(const std::vector<ComponentProblem>& parts);

/// Splits a stacked length-mp vector back into p length-m vectors.
std::vector<Eigen::VectorXd> unstack_multivariate(const Eigen::VectorXd& values,
                                                  std::size_t components);

namespace detail {

/// Shared solver behind the public estimators. `phi_diag` may contain zeros
/// (held-out areas) provided Phi + gamma Omega stays positive definite;
/// otherwise NumericalError is thrown.
class PenalizedSystem {
 public:
  PenalizedSystem(const Eigen::VectorXd& phi_diag, const Eigen::MatrixXd& omega,
                  double gamma);

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

  /// Minimizer without constraints.
  Eigen::VectorXd smoothed(const Eigen::VectorXd& theta) const;

  /// Minimizer under M delta = t (the closed form written in full).
  Eigen::VectorXd benchmarked(const Eigen::VectorXd& theta,
                              const Eigen::MatrixXd& m,
                              const Eigen::VectorXd& t) const;

  const Eigen::VectorXd& phi() const { return phi_; }

 private:
  Eigen::VectorXd phi_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  bool zero_penalty_ = false;
};

void check_finite(const Eigen::VectorXd& v, const char* what);

}  // namespace detail

}  // namespace cbsae
