#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cbsae/estimators.hpp"

namespace cbsae {

/// Units strictly nested in areas. Unit vectors are ordered area by area:
/// area 0's units first, then area 1's, and so on.
class UnitLevelLayout {
 public:
  UnitLevelLayout(std::vector<std::size_t> units_per_area, LossWeights area_weights,
                  LossWeights unit_weights, double gamma_area, double gamma_unit);

  std::size_t areas() const { return units_per_area_.size(); }
  std::size_t units() const { return total_units_; }
  std::size_t units_in(std::size_t area) const { return units_per_area_[area]; }
  std::size_t first_unit(std::size_t area) const { return offsets_[area]; }
  std::size_t area_of_unit(std::size_t unit) const;

  const LossWeights& area_weights() const { return area_weights_; }
  const LossWeights& unit_weights() const { return unit_weights_; }
  double gamma_area() const { return gamma_area_; }
  double gamma_unit() const { return gamma_unit_; }

  UnitLevelLayout with_penalties(double gamma_area, double gamma_unit) const;

 private:
  std::vector<std::size_t> units_per_area_;
  std::vector<std::size_t> offsets_;
  std::size_t total_units_ = 0;
  LossWeights area_weights_;
  LossWeights unit_weights_;
  double gamma_area_ = 0.0;
  double gamma_unit_ = 0.0;
};

/// The (m + N)-dimensional problem obtained by stacking area and unit levels:
/// block-diagonal Phi = diag(Phi_A, Xi), and a single scalar penalty with
/// block-diagonal Omega = diag(Omega_A, (gamma_U / gamma_A) Omega_U). When
/// gamma_A = 0 the area block is dropped and gamma_U carries the penalty.
struct StackedUnitProblem {
  Eigen::VectorXd theta_bayes;
  LossWeights phi;
  SmoothnessMatrix omega;
  double gamma = 0.0;
};

StackedUnitProblem stack_unit_level(const UnitLevelLayout& layout,
                                    const Eigen::VectorXd& theta_area,
                                    const Eigen::VectorXd& theta_unit,
                                    const SmoothnessMatrix& omega_area,
                                    const SmoothnessMatrix& omega_unit);

/// Area and unit smoothed estimates, solved level by level.
std::pair<SmoothedEstimate, SmoothedEstimate> unit_level_smoothed(
    const UnitLevelLayout& layout, const Eigen::VectorXd& theta_area,
    const Eigen::VectorXd& theta_unit, const SmoothnessMatrix& omega_area,
    const SmoothnessMatrix& omega_unit);

/// Same minimizer through one stacked (m + N) solve.
SmoothedEstimate unit_level_stacked_smoothed(const UnitLevelLayout& layout,
                                             const Eigen::VectorXd& theta_area,
                                             const Eigen::VectorXd& theta_unit,
                                             const SmoothnessMatrix& omega_area,
                                             const SmoothnessMatrix& omega_unit);

/// M = [[eta', 0_N], [-I_m, W]] and t = (t_A, 0_m): the area estimates'
/// eta-weighted mean hits t_A and each area estimate equals the W-weighted
/// mean of its own units. W (m x N) must be zero outside each area's units.
ConstraintSet unit_level_constraints(const UnitLevelLayout& layout,
                                     const Eigen::VectorXd& eta, double target_area,
                                     const Eigen::MatrixXd& unit_weights);

/// Stacked length-(m + N) benchmarked estimate: area values first, then units.
BenchmarkedEstimate unit_level_benchmarked(
    const UnitLevelLayout& layout, const Eigen::VectorXd& theta_area,
    const Eigen::VectorXd& theta_unit, const SmoothnessMatrix& omega_area,
    const SmoothnessMatrix& omega_unit, const Eigen::VectorXd& eta,
    double target_area, const Eigen::MatrixXd& unit_weights);

}  // namespace cbsae
