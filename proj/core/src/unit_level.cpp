#include "cbsae/unit_level.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cbsae/error.hpp"

namespace cbsae {

UnitLevelLayout::UnitLevelLayout(std::vector<std::size_t> units_per_area,
                                 LossWeights area_weights, LossWeights unit_weights,
                                 double gamma_area, double gamma_unit)
    : units_per_area_(std::move(units_per_area)),
      area_weights_(std::move(area_weights)),
      unit_weights_(std::move(unit_weights)),
      gamma_area_(gamma_area),
      gamma_unit_(gamma_unit) {
  if (units_per_area_.empty()) throw ValidationError("layout needs at least one area");
  offsets_.reserve(units_per_area_.size());
  for (const auto n : units_per_area_) {
    if (n == 0) throw ValidationError("every area needs at least one unit");
    offsets_.push_back(total_units_);
    total_units_ += n;
  }
  if (area_weights_.size() != units_per_area_.size()) {
    throw ValidationError("area weights: expected " +
                          std::to_string(units_per_area_.size()) + " entries");
  }
  if (unit_weights_.size() != total_units_) {
    throw ValidationError("unit weights: expected " + std::to_string(total_units_) +
                          " entries");
  }
  for (const double g : {gamma_area_, gamma_unit_}) {
    if (!std::isfinite(g) || g < 0.0) {
      throw ValidationError("penalty factors must be finite and >= 0");
    }
  }
}

std::size_t UnitLevelLayout::area_of_unit(std::size_t unit) const {
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), unit);
  return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

UnitLevelLayout UnitLevelLayout::with_penalties(double gamma_area,
                                                double gamma_unit) const {
  return UnitLevelLayout(units_per_area_, area_weights_, unit_weights_, gamma_area,
                         gamma_unit);
}

namespace {

void check_dims(const UnitLevelLayout& layout, const Eigen::VectorXd& theta_area,
                const Eigen::VectorXd& theta_unit, const SmoothnessMatrix& omega_area,
                const SmoothnessMatrix& omega_unit) {
  const auto m = layout.areas();
  const auto n = layout.units();
  if (static_cast<std::size_t>(theta_area.size()) != m || omega_area.size() != m) {
    throw ValidationError("area-level inputs must have " + std::to_string(m) +
                          " entries");
  }
  if (static_cast<std::size_t>(theta_unit.size()) != n || omega_unit.size() != n) {
    throw ValidationError("unit-level inputs must have " + std::to_string(n) +
                          " entries");
  }
}

}  // namespace

StackedUnitProblem stack_unit_level(const UnitLevelLayout& layout,
                                    const Eigen::VectorXd& theta_area,
                                    const Eigen::VectorXd& theta_unit,
                                    const SmoothnessMatrix& omega_area,
                                    const SmoothnessMatrix& omega_unit) {
  check_dims(layout, theta_area, theta_unit, omega_area, omega_unit);
  const auto m = static_cast<Eigen::Index>(layout.areas());
  const auto n = static_cast<Eigen::Index>(layout.units());

  StackedUnitProblem out;
  out.theta_bayes.resize(m + n);
  out.theta_bayes << theta_area, theta_unit;

  Eigen::VectorXd phi(m + n);
  phi << layout.area_weights().values(), layout.unit_weights().values();
  out.phi = LossWeights(std::move(phi));

  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(m + n, m + n);
  if (layout.gamma_area() > 0.0) {
    omega.topLeftCorner(m, m) = omega_area.matrix();
    omega.bottomRightCorner(n, n) =
        (layout.gamma_unit() / layout.gamma_area()) * omega_unit.matrix();
    out.gamma = layout.gamma_area();
  } else {
    omega.bottomRightCorner(n, n) = omega_unit.matrix();
    out.gamma = layout.gamma_unit();
  }
  out.omega = SmoothnessMatrix(std::move(omega));
  return out;
}

std::pair<SmoothedEstimate, SmoothedEstimate> unit_level_smoothed(
    const UnitLevelLayout& layout, const Eigen::VectorXd& theta_area,
    const Eigen::VectorXd& theta_unit, const SmoothnessMatrix& omega_area,
    const SmoothnessMatrix& omega_unit) {
  check_dims(layout, theta_area, theta_unit, omega_area, omega_unit);
  return {smoothed_estimate(theta_area, layout.area_weights(), omega_area,
                            layout.gamma_area()),
          smoothed_estimate(theta_unit, layout.unit_weights(), omega_unit,
                            layout.gamma_unit())};
}

SmoothedEstimate unit_level_stacked_smoothed(const UnitLevelLayout& layout,
                                             const Eigen::VectorXd& theta_area,
                                             const Eigen::VectorXd& theta_unit,
                                             const SmoothnessMatrix& omega_area,
                                             const SmoothnessMatrix& omega_unit) {
  const auto stacked =
      stack_unit_level(layout, theta_area, theta_unit, omega_area, omega_unit);
  return smoothed_estimate(stacked.theta_bayes, stacked.phi, stacked.omega,
                           stacked.gamma);
}

ConstraintSet unit_level_constraints(const UnitLevelLayout& layout,
                                     const Eigen::VectorXd& eta, double target_area,
                                     const Eigen::MatrixXd& unit_weights) {
  const auto m = static_cast<Eigen::Index>(layout.areas());
  const auto n = static_cast<Eigen::Index>(layout.units());
  if (eta.size() != m) throw ValidationError("eta must have one entry per area");
  if (unit_weights.rows() != m || unit_weights.cols() != n) {
    throw ValidationError("unit weight matrix must be m x N");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto lo = static_cast<Eigen::Index>(layout.first_unit(static_cast<std::size_t>(i)));
    const auto hi = lo + static_cast<Eigen::Index>(layout.units_in(static_cast<std::size_t>(i)));
    for (Eigen::Index u = 0; u < n; ++u) {
      if ((u < lo || u >= hi) && unit_weights(i, u) != 0.0) {
        throw ValidationError("unit weight row " + std::to_string(i) +
                              " has weight on unit " + std::to_string(u) +
                              " outside its area");
      }
    }
  }
  Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(m + 1, m + n);
  mat.row(0).head(m) = eta.transpose();
  mat.bottomLeftCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
  mat.bottomRightCorner(m, n) = unit_weights;
  Eigen::VectorXd t = Eigen::VectorXd::Zero(m + 1);
  t[0] = target_area;
  return ConstraintSet(std::move(mat), std::move(t));
}

BenchmarkedEstimate unit_level_benchmarked(
    const UnitLevelLayout& layout, const Eigen::VectorXd& theta_area,
    const Eigen::VectorXd& theta_unit, const SmoothnessMatrix& omega_area,
    const SmoothnessMatrix& omega_unit, const Eigen::VectorXd& eta,
    double target_area, const Eigen::MatrixXd& unit_weights) {
  const auto stacked =
      stack_unit_level(layout, theta_area, theta_unit, omega_area, omega_unit);
  const auto constraints =
      unit_level_constraints(layout, eta, target_area, unit_weights);
  return benchmarked_estimate(stacked.theta_bayes, stacked.phi, stacked.omega,
                              stacked.gamma, constraints);
}

}  // namespace cbsae
