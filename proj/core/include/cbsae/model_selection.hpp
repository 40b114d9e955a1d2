#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cbsae/estimators.hpp"
#include "cbsae/unit_level.hpp"

namespace cbsae {

/// Leave-one-out cross-validation scores over an ascending grid of penalties.
/// Infeasible grid points carry +inf and are listed in `infeasible`.
struct CvCurve {
  std::vector<double> grid;
  std::vector<double> scores;
  double gamma_hat = 0.0;
  double best_score = 0.0;
  std::vector<std::size_t> infeasible;
};

/// Log-spaced grid: n points from lo to hi inclusive (n = 1 gives {lo}).
std::vector<double> log_grid(double lo, double hi, std::size_t n);

/// Default search grid: 40 log-spaced points over [1e-4, 1e2].
std::vector<double> default_gamma_grid();

/// Solution of the full problem with area i's loss term removed (Phi_ii set
/// to 0). The smoothness penalty and any constraints still act on all of
/// delta. Throws NumericalError("held-out area i is unidentified at this
/// gamma") when the reduced problem has no unique minimizer.
Eigen::VectorXd loo_solution(const Eigen::VectorXd& theta_bayes,
                             const LossWeights& phi, const SmoothnessMatrix& omega,
                             double gamma, std::size_t held_out,
                             const std::optional<ConstraintSet>& constraints = {});

/// V(gamma) = (1/m) sum_i phi_i (delta_i^(-i)(gamma) - theta_i)^2 on each grid
/// point; gamma_hat is the argmin with ties going to the smallest gamma.
/// `threads` > 1 evaluates grid points concurrently with identical results.
CvCurve cross_validate(const Eigen::VectorXd& theta_bayes, const LossWeights& phi,
                       const SmoothnessMatrix& omega, const std::vector<double>& grid,
                       const std::optional<ConstraintSet>& constraints = {},
                       unsigned threads = 1);

/// Product-grid search for the (gamma_A, gamma_U) pair of a unit-level model.
/// Every coordinate of the stacked (m + N) problem is held out in turn; the
/// score is V_A + V_U with V_A = (1/m) sum_i phi_i r_i^2 over areas and
/// V_U = (1/N) sum_ij xi_ij r_ij^2 over units.
struct UnitCvResult {
  std::vector<double> grid_area;
  std::vector<double> grid_unit;
  Eigen::MatrixXd area_scores;  // |grid_area| x |grid_unit|
  Eigen::MatrixXd unit_scores;
  Eigen::MatrixXd scores;
  double gamma_area_hat = 0.0;
  double gamma_unit_hat = 0.0;
  /// Slices through the optimum: V over grid_area at gamma_unit_hat, and over
  /// grid_unit at gamma_area_hat.
  CvCurve area_curve;
  CvCurve unit_curve;
};

UnitCvResult cross_validate_unit(const UnitLevelLayout& layout,
                                 const Eigen::VectorXd& theta_area,
                                 const Eigen::VectorXd& theta_unit,
                                 const SmoothnessMatrix& omega_area,
                                 const SmoothnessMatrix& omega_unit,
                                 const std::vector<double>& grid_area,
                                 const std::vector<double>& grid_unit,
                                 const std::optional<ConstraintSet>& constraints = {});

}  // namespace cbsae
