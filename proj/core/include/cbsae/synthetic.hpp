#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbsae/area_data.hpp"
#include "cbsae/graph_smoothness.hpp"

namespace cbsae {

struct StateInfo {
  const char* code;    // USPS code, used as the area label
  const char* name;
  const char* region;  // Census region
};

/// The 50 states plus DC in FIPS order.
const std::vector<StateInfo>& us_states();

/// Draws (theta, y) from the Fay-Herriot model for fixed X, beta, sigma_u^2, D.
struct FayHerriotDraw {
  Eigen::VectorXd theta;
  Eigen::VectorXd y;
};
FayHerriotDraw simulate_fay_herriot(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                                    double sigma_u2, const Eigen::VectorXd& d,
                                    std::uint64_t seed);

/// A 51-area dataset shaped like state-level child-poverty data: three
/// covariates, population-driven sampling variances, a spatially smooth
/// component along the given adjacency, and population benchmark weights.
struct SyntheticAreas {
  AreaDataset data;             // columns: y, D, irs_rate, nonfiler_rate,
                                // food_stamp_rate, pop_5_17, region
  Eigen::VectorXd theta_true;
};
SyntheticAreas generate_saipe_like(const SimilaritySpec& adjacency, std::uint64_t seed);

/// Writes the dataset with an extra theta_true column.
void write_synthetic_csv(const std::string& path, const SyntheticAreas& s);

}  // namespace cbsae
