#include "cbsae/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "cbsae/error.hpp"

namespace cbsae {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ValidationError("cross-validation grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k]) || !(grid[k] > 0.0)) {
      throw ValidationError("cross-validation grid entries must be finite and > 0");
    }
    if (k > 0 && !(grid[k] > grid[k - 1])) {
      throw ValidationError("cross-validation grid must be strictly increasing");
    }
  }
}

[[noreturn]] void unidentified(std::size_t i) {
  throw NumericalError("held-out area " + std::to_string(i) +
                       " is unidentified at this gamma");
}

// Reduced problem with one loss weight zeroed. Without constraints this is a
// Cholesky solve; with constraints the held-out block may only be pinned by M,
// so the full KKT system is solved instead.
Eigen::VectorXd solve_held_out(const Eigen::VectorXd& theta, Eigen::VectorXd phi,
                               const Eigen::MatrixXd& omega, double gamma,
                               std::size_t i, const ConstraintSet* constraints) {
  const auto n = static_cast<Eigen::Index>(theta.size());
  phi[static_cast<Eigen::Index>(i)] = 0.0;
  if (constraints == nullptr) {
    try {
      const detail::PenalizedSystem system(phi, omega, gamma);
      // Zeroing phi_i leaves the system less well conditioned; one step of
      // iterative refinement recovers the lost digits.
      const Eigen::VectorXd rhs = phi.cwiseProduct(theta);
      Eigen::VectorXd delta = system.solve(rhs);
      Eigen::MatrixXd sigma = gamma * omega;
      sigma.diagonal() += phi;
      delta += system.solve(Eigen::VectorXd(rhs - sigma * delta));
      return delta;
    } catch (const NumericalError&) {
      unidentified(i);
    }
  }
  const auto& m = constraints->matrix();
  const auto k = m.rows();
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
  kkt.topLeftCorner(n, n) = gamma * omega;
  kkt.topLeftCorner(n, n).diagonal() += phi;
  kkt.topRightCorner(n, k) = m.transpose();
  kkt.bottomLeftCorner(k, n) = m;
  Eigen::VectorXd rhs(n + k);
  rhs << phi.cwiseProduct(theta), constraints->targets();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) unidentified(i);
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite() || (kkt * sol - rhs).lpNorm<Eigen::Infinity>() >
                              1e-8 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) {
    unidentified(i);
  }
  return sol.head(n);
}

// Per-coordinate squared held-out errors times weight; +inf when unidentified.
Eigen::VectorXd held_out_errors(const Eigen::VectorXd& theta, const Eigen::VectorXd& phi,
                                const Eigen::MatrixXd& omega, double gamma,
                                const ConstraintSet* constraints) {
  const auto n = theta.size();
  Eigen::VectorXd err(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    try {
      const auto delta = solve_held_out(theta, phi, omega, gamma,
                                        static_cast<std::size_t>(i), constraints);
      const double r = delta[i] - theta[i];
      err[i] = phi[i] * r * r;
    } catch (const NumericalError&) {
      err[i] = kInf;
    }
  }
  return err;
}

CvCurve finish_curve(std::vector<double> grid, std::vector<double> scores) {
  CvCurve curve;
  curve.grid = std::move(grid);
  curve.scores = std::move(scores);
  curve.best_score = kInf;
  for (std::size_t k = 0; k < curve.grid.size(); ++k) {
    if (!std::isfinite(curve.scores[k])) {
      curve.infeasible.push_back(k);
      continue;
    }
    if (curve.scores[k] < curve.best_score) {
      curve.best_score = curve.scores[k];
      curve.gamma_hat = curve.grid[k];
    }
  }
  if (curve.infeasible.size() == curve.grid.size()) {
    throw NumericalError("cross-validation: every grid point is infeasible");
  }
  return curve;
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (n == 0 || !(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
    throw ValidationError("log grid needs 0 < lo <= hi and n >= 1");
  }
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> default_gamma_grid() { return log_grid(1e-4, 1e2, 40); }

Eigen::VectorXd loo_solution(const Eigen::VectorXd& theta_bayes,
                             const LossWeights& phi, const SmoothnessMatrix& omega,
                             double gamma, std::size_t held_out,
                             const std::optional<ConstraintSet>& constraints) {
  detail::check_finite(theta_bayes, "Bayes estimate");
  const auto m = static_cast<std::size_t>(theta_bayes.size());
  if (phi.size() != m || omega.size() != m) {
    throw ValidationError("dimension mismatch in loo_solution");
  }
  if (held_out >= m) throw ValidationError("held-out index out of range");
  if (!std::isfinite(gamma) || !(gamma > 0.0)) {
    throw ValidationError("leave-one-out requires gamma > 0");
  }
  if (constraints && constraints->dimension() != m) {
    throw ValidationError("constraint matrix has wrong column count");
  }
  return solve_held_out(theta_bayes, phi.values(), omega.matrix(), gamma, held_out,
                        constraints ? &*constraints : nullptr);
}

CvCurve cross_validate(const Eigen::VectorXd& theta_bayes, const LossWeights& phi,
                       const SmoothnessMatrix& omega, const std::vector<double>& grid,
                       const std::optional<ConstraintSet>& constraints,
                       unsigned threads) {
  check_grid(grid);
  detail::check_finite(theta_bayes, "Bayes estimate");
  const auto m = static_cast<std::size_t>(theta_bayes.size());
  if (phi.size() != m || omega.size() != m) {
    throw ValidationError("dimension mismatch in cross_validate");
  }
  if (constraints && constraints->dimension() != m) {
    throw ValidationError("constraint matrix has wrong column count");
  }
  const ConstraintSet* c = constraints ? &*constraints : nullptr;
  std::vector<double> scores(grid.size());
  auto score_point = [&](std::size_t k) {
    const auto err = held_out_errors(theta_bayes, phi.values(), omega.matrix(), grid[k], c);
    scores[k] = err.allFinite() ? err.sum() / static_cast<double>(m) : kInf;
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(grid.size())));
  if (threads == 1) {
    for (std::size_t k = 0; k < grid.size(); ++k) score_point(k);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < grid.size(); k += threads) score_point(k);
      });
    }
  }
  return finish_curve(grid, std::move(scores));
}

UnitCvResult cross_validate_unit(const UnitLevelLayout& layout,
                                 const Eigen::VectorXd& theta_area,
                                 const Eigen::VectorXd& theta_unit,
                                 const SmoothnessMatrix& omega_area,
                                 const SmoothnessMatrix& omega_unit,
                                 const std::vector<double>& grid_area,
                                 const std::vector<double>& grid_unit,
                                 const std::optional<ConstraintSet>& constraints) {
  check_grid(grid_area);
  check_grid(grid_unit);
  const auto m = static_cast<Eigen::Index>(layout.areas());
  const auto n = static_cast<Eigen::Index>(layout.units());
  if (constraints && constraints->dimension() != static_cast<std::size_t>(m + n)) {
    throw ValidationError("unit-level constraints must span all m + N estimates");
  }
  const ConstraintSet* c = constraints ? &*constraints : nullptr;

  UnitCvResult out;
  out.grid_area = grid_area;
  out.grid_unit = grid_unit;
  const auto ga = static_cast<Eigen::Index>(grid_area.size());
  const auto gu = static_cast<Eigen::Index>(grid_unit.size());
  out.area_scores.resize(ga, gu);
  out.unit_scores.resize(ga, gu);
  out.scores.resize(ga, gu);

  double best = kInf;
  Eigen::Index best_a = -1;
  Eigen::Index best_u = -1;
  for (Eigen::Index a = 0; a < ga; ++a) {
    for (Eigen::Index u = 0; u < gu; ++u) {
      const auto trial = layout.with_penalties(grid_area[static_cast<std::size_t>(a)],
                                               grid_unit[static_cast<std::size_t>(u)]);
      const auto stacked =
          stack_unit_level(trial, theta_area, theta_unit, omega_area, omega_unit);
      const auto err = held_out_errors(stacked.theta_bayes, stacked.phi.values(),
                                       stacked.omega.matrix(), stacked.gamma, c);
      const double va = err.head(m).allFinite()
                            ? err.head(m).sum() / static_cast<double>(m) : kInf;
      const double vu = err.tail(n).allFinite()
                            ? err.tail(n).sum() / static_cast<double>(n) : kInf;
      out.area_scores(a, u) = va;
      out.unit_scores(a, u) = vu;
      out.scores(a, u) = va + vu;
      if (out.scores(a, u) < best) {
        best = out.scores(a, u);
        best_a = a;
        best_u = u;
      }
    }
  }
  if (best_a < 0) throw NumericalError("cross-validation: every grid point is infeasible");
  out.gamma_area_hat = grid_area[static_cast<std::size_t>(best_a)];
  out.gamma_unit_hat = grid_unit[static_cast<std::size_t>(best_u)];

  std::vector<double> slice_a(static_cast<std::size_t>(ga));
  for (Eigen::Index a = 0; a < ga; ++a) slice_a[static_cast<std::size_t>(a)] = out.scores(a, best_u);
  std::vector<double> slice_u(static_cast<std::size_t>(gu));
  for (Eigen::Index u = 0; u < gu; ++u) slice_u[static_cast<std::size_t>(u)] = out.scores(best_a, u);
  out.area_curve = finish_curve(grid_area, std::move(slice_a));
  out.unit_curve = finish_curve(grid_unit, std::move(slice_u));
  return out;
}

}  // namespace cbsae
