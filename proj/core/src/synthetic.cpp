#include "cbsae/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cbsae/error.hpp"
#include "cbsae/io.hpp"
#include "cbsae/random.hpp"

namespace cbsae {

const std::vector<StateInfo>& us_states() {
  static const std::vector<StateInfo> states = {
      {"AL", "Alabama", "South"},        {"AK", "Alaska", "West"},
      {"AZ", "Arizona", "West"},         {"AR", "Arkansas", "South"},
      {"CA", "California", "West"},      {"CO", "Colorado", "West"},
      {"CT", "Connecticut", "Northeast"}, {"DE", "Delaware", "South"},
      {"DC", "District of Columbia", "South"}, {"FL", "Florida", "South"},
      {"GA", "Georgia", "South"},        {"HI", "Hawaii", "West"},
      {"ID", "Idaho", "West"},           {"IL", "Illinois", "Midwest"},
      {"IN", "Indiana", "Midwest"},      {"IA", "Iowa", "Midwest"},
      {"KS", "Kansas", "Midwest"},       {"KY", "Kentucky", "South"},
      {"LA", "Louisiana", "South"},      {"ME", "Maine", "Northeast"},
      {"MD", "Maryland", "South"},       {"MA", "Massachusetts", "Northeast"},
      {"MI", "Michigan", "Midwest"},     {"MN", "Minnesota", "Midwest"},
      {"MS", "Mississippi", "South"},    {"MO", "Missouri", "Midwest"},
      {"MT", "Montana", "West"},         {"NE", "Nebraska", "Midwest"},
      {"NV", "Nevada", "West"},          {"NH", "New Hampshire", "Northeast"},
      {"NJ", "New Jersey", "Northeast"}, {"NM", "New Mexico", "West"},
      {"NY", "New York", "Northeast"},   {"NC", "North Carolina", "South"},
      {"ND", "North Dakota", "Midwest"}, {"OH", "Ohio", "Midwest"},
      {"OK", "Oklahoma", "South"},       {"OR", "Oregon", "West"},
      {"PA", "Pennsylvania", "Northeast"}, {"RI", "Rhode Island", "Northeast"},
      {"SC", "South Carolina", "South"}, {"SD", "South Dakota", "Midwest"},
      {"TN", "Tennessee", "South"},      {"TX", "Texas", "South"},
      {"UT", "Utah", "West"},            {"VT", "Vermont", "Northeast"},
      {"VA", "Virginia", "South"},       {"WA", "Washington", "West"},
      {"WV", "West Virginia", "South"},  {"WI", "Wisconsin", "Midwest"},
      {"WY", "Wyoming", "West"},
  };
  return states;
}

FayHerriotDraw simulate_fay_herriot(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                                    double sigma_u2, const Eigen::VectorXd& d,
                                    std::uint64_t seed) {
  if (x.cols() != beta.size() || x.rows() != d.size()) {
    throw ValidationError("simulate_fay_herriot: dimension mismatch");
  }
  CounterRng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FayHerriotDraw out;
  out.theta = x * beta;
  out.y.resize(x.rows());
  const double su = std::sqrt(sigma_u2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out.theta[i] += su * normal(rng);
    out.y[i] = out.theta[i] + std::sqrt(d[i]) * normal(rng);
  }
  return out;
}

SyntheticAreas generate_saipe_like(const SimilaritySpec& adjacency, std::uint64_t seed) {
  const auto& states = us_states();
  const auto m = static_cast<Eigen::Index>(states.size());
  if (adjacency.size() != states.size()) {
    throw ValidationError("adjacency must cover the 51 state-level areas");
  }
  CounterRng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto noise = [&] {
    Eigen::VectorXd v(m);
    for (Eigen::Index i = 0; i < m; ++i) v[i] = normal(rng);
    return v;
  };

  // Spatially smooth fields: (I + 2 Omega)^-1 z, rescaled to unit sd.
  const Eigen::MatrixXd omega = build_omega(adjacency).matrix();
  const Eigen::MatrixXd smoother = Eigen::MatrixXd::Identity(m, m) + 2.0 * omega;
  const auto llt = smoother.llt();
  auto smooth_field = [&] {
    Eigen::VectorXd f = llt.solve(noise());
    f.array() -= f.mean();
    return Eigen::VectorXd(f / std::sqrt(f.squaredNorm() / static_cast<double>(m)));
  };
  const Eigen::VectorXd economy = smooth_field();
  const Eigen::VectorXd regional = smooth_field();

  Eigen::VectorXd pop(m);
  const Eigen::VectorXd z_pop = noise();
  for (Eigen::Index i = 0; i < m; ++i) {
    pop[i] = std::round(std::clamp(std::exp(std::log(9.0e5) + 0.9 * z_pop[i]), 6.0e4, 7.0e6));
  }
  const Eigen::VectorXd irs = (14.0 + 3.5 * economy.array() + 1.5 * noise().array()).matrix();
  const Eigen::VectorXd nonfiler =
      (10.0 + 2.5 * economy.array() + 1.5 * noise().array()).matrix();
  const Eigen::VectorXd food =
      (9.0 + 2.0 * economy.array() + 1.5 * noise().array()).matrix();

  SyntheticAreas out;
  auto& data = out.data;
  data.covariates.resize(m, 4);
  data.covariates.col(0).setOnes();
  data.covariates.col(1) = irs;
  data.covariates.col(2) = nonfiler;
  data.covariates.col(3) = food;
  data.covariate_names = {kInterceptName, "irs_rate", "nonfiler_rate", "food_stamp_rate"};

  Eigen::VectorXd beta(4);
  beta << 1.5, 0.6, 0.25, 0.2;
  out.theta_true = data.covariates * beta + 1.5 * regional + 1.2 * noise();

  data.sampling_variance = (5.4e6 / pop.array()).cwiseMax(0.5).cwiseMin(40.0).matrix();
  data.y = out.theta_true + data.sampling_variance.cwiseSqrt().cwiseProduct(noise());
  data.benchmark_weights = pop;
  data.groups = std::vector<std::string>();
  for (const auto& s : states) {
    data.labels.emplace_back(s.code);
    data.groups->emplace_back(s.region);
  }
  data.validate();
  return out;
}

void write_synthetic_csv(const std::string& path, const SyntheticAreas& s) {
  const auto& d = s.data;
  CsvTable t;
  t.header = {"label", "y", "D", "irs_rate", "nonfiler_rate", "food_stamp_rate",
              "pop_5_17", "region", "theta_true"};
  for (std::size_t i = 0; i < d.areas(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    t.rows.push_back({d.labels[i], format_double(d.y[r]),
                      format_double(d.sampling_variance[r]),
                      format_double(d.covariates(r, 1)), format_double(d.covariates(r, 2)),
                      format_double(d.covariates(r, 3)),
                      format_double((*d.benchmark_weights)[r]), (*d.groups)[i],
                      format_double(s.theta_true[r])});
  }
  write_csv(path, t);
}

}  // namespace cbsae
