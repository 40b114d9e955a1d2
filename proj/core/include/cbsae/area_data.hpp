#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cbsae {

/// One row per area: direct estimate y, known sampling variance D, covariates
/// X (intercept column included when requested), plus optional columns.
struct AreaDataset {
  std::vector<std::string> labels;
  Eigen::VectorXd y;
  Eigen::VectorXd sampling_variance;  // D_i
  Eigen::MatrixXd covariates;         // m x p
  std::vector<std::string> covariate_names;
  std::optional<Eigen::VectorXd> loss_weights;       // phi_i
  std::optional<Eigen::VectorXd> benchmark_weights;  // w_i, raw (unnormalized)
  std::optional<std::vector<std::string>> groups;

  std::size_t areas() const { return labels.size(); }
  std::size_t predictors() const {
    return static_cast<std::size_t>(covariates.cols());
  }

  /// Shape, finiteness, D_i >= 0, unique labels. Throws ValidationError.
  void validate() const;

  /// Same data with a replaced response vector.
  AreaDataset with_response(Eigen::VectorXd new_y) const;
};

}  // namespace cbsae
