#include <random>

#include <gtest/gtest.h>

#include "cbsae/error.hpp"
#include "cbsae/unit_level.hpp"
#include "oracles.hpp"

using namespace cbsae;

namespace {

struct UnitInstance {
  std::vector<std::size_t> n;
  Eigen::VectorXd phi, xi, theta_a, theta_u;
  Eigen::MatrixXd omega_a, omega_u;
  double gamma_a, gamma_u;

  UnitLevelLayout layout() const {
    return UnitLevelLayout(n, LossWeights(phi), LossWeights(xi), gamma_a, gamma_u);
  }
};

UnitInstance random_unit_instance(std::mt19937_64& rng, std::vector<std::size_t> n) {
  UnitInstance in;
  in.n = n;
  const auto m = static_cast<Eigen::Index>(n.size());
  Eigen::Index total = 0;
  for (auto k : n) total += static_cast<Eigen::Index>(k);
  in.phi = oracle::random_vector(rng, m, 0.3, 3);
  in.xi = oracle::random_vector(rng, total, 0.3, 3);
  in.theta_a = oracle::random_vector(rng, m, -5, 5);
  in.theta_u = oracle::random_vector(rng, total, -5, 5);
  in.omega_a = build_omega(SimilaritySpec::from_dense(oracle::random_similarity(rng, m, 0.7))).matrix();
  in.omega_u = build_omega(SimilaritySpec::from_dense(oracle::random_similarity(rng, total, 0.5))).matrix();
  std::uniform_real_distribution<double> g(0.05, 3.0);
  in.gamma_a = g(rng);
  in.gamma_u = g(rng);
  return in;
}

// Within-area weights, written directly from the nesting.
Eigen::MatrixXd within_area_weights(std::mt19937_64& rng, const std::vector<std::size_t>& n) {
  Eigen::Index total = 0;
  for (auto k : n) total += static_cast<Eigen::Index>(k);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n.size()), total);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < n[i]; ++j) s += (w(static_cast<Eigen::Index>(i), col + j) = u(rng));
    w.row(static_cast<Eigen::Index>(i)).segment(col, n[i]) /= s;
    col += static_cast<Eigen::Index>(n[i]);
  }
  return w;
}

}  // namespace

TEST(UnitLevelLayout, IndexingFollowsNesting) {
  UnitLevelLayout layout({1, 3, 2}, LossWeights::ones(3), LossWeights::ones(6), 1, 1);
  EXPECT_EQ(layout.areas(), 3u);
  EXPECT_EQ(layout.units(), 6u);
  EXPECT_EQ(layout.first_unit(2), 4u);
  EXPECT_EQ(layout.area_of_unit(0), 0u);
  EXPECT_EQ(layout.area_of_unit(3), 1u);
  EXPECT_EQ(layout.area_of_unit(5), 2u);
  EXPECT_THROW(UnitLevelLayout({1, 0}, LossWeights::ones(2), LossWeights::ones(1), 1, 1),
               ValidationError);
  EXPECT_THROW(UnitLevelLayout({1, 2}, LossWeights::ones(2), LossWeights::ones(2), 1, 1),
               ValidationError);
  EXPECT_THROW(UnitLevelLayout({1}, LossWeights::ones(1), LossWeights::ones(1), -1, 1),
               ValidationError);
}

TEST(UnitLevelSmoothed, ZeroPenaltiesReturnInputs) {
  std::mt19937_64 rng(1);
  auto in = random_unit_instance(rng, {2, 3});
  in.gamma_a = in.gamma_u = 0.0;
  auto [a, u] = unit_level_smoothed(in.layout(), in.theta_a, in.theta_u,
                                    SmoothnessMatrix(in.omega_a), SmoothnessMatrix(in.omega_u));
  EXPECT_TRUE(a.values == in.theta_a);
  EXPECT_TRUE(u.values == in.theta_u);
  auto stacked = unit_level_stacked_smoothed(in.layout(), in.theta_a, in.theta_u,
                                             SmoothnessMatrix(in.omega_a),
                                             SmoothnessMatrix(in.omega_u));
  EXPECT_TRUE(stacked.values.head(2) == in.theta_a);
  EXPECT_TRUE(stacked.values.tail(5) == in.theta_u);
}

TEST(UnitLevelSmoothed, WorkedExamplePerBlock) {
  Eigen::Matrix2d om;
  om << 2, -2, -2, 2;
  UnitLevelLayout layout({1, 1}, LossWeights::ones(2), LossWeights::ones(2), 1.0, 1.0);
  Eigen::Vector2d theta(1, 3);
  auto [a, u] = unit_level_smoothed(layout, theta, theta, SmoothnessMatrix(om), SmoothnessMatrix(om));
  auto stacked = unit_level_stacked_smoothed(layout, theta, theta, SmoothnessMatrix(om),
                                             SmoothnessMatrix(om));
  Eigen::Vector4d expected(9.0 / 5, 11.0 / 5, 9.0 / 5, 11.0 / 5);
  EXPECT_LE((stacked.values - expected).lpNorm<Eigen::Infinity>(), 1e-14);
  EXPECT_LE((a.values - expected.head(2)).lpNorm<Eigen::Infinity>(), 1e-14);
  EXPECT_LE((u.values - expected.tail(2)).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(UnitLevelSmoothed, StackedEqualsPerLevelSolves) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> nunits(1, 4);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::size_t> n(1 + rep % 5);
    for (auto& k : n) k = nunits(rng);
    auto in = random_unit_instance(rng, n);
    if (rep % 7 == 0) in.gamma_a = 0.0;
    if (rep % 11 == 0) in.gamma_u = 0.0;
    SmoothnessMatrix oa(in.omega_a), ou(in.omega_u);
    auto [a, u] = unit_level_smoothed(in.layout(), in.theta_a, in.theta_u, oa, ou);
    auto stacked = unit_level_stacked_smoothed(in.layout(), in.theta_a, in.theta_u, oa, ou);
    const auto m = in.theta_a.size();
    EXPECT_LE((stacked.values.head(m) - a.values).lpNorm<Eigen::Infinity>(), 1e-12) << rep;
    EXPECT_LE((stacked.values.tail(in.theta_u.size()) - u.values).lpNorm<Eigen::Infinity>(),
              1e-12)
        << rep;
  }
}

TEST(UnitLevelSmoothed, SmallLayoutOneAndTwoUnits) {
  std::mt19937_64 rng(3);
  auto in = random_unit_instance(rng, {1, 2});
  SmoothnessMatrix oa(in.omega_a), ou(in.omega_u);
  auto [a, u] = unit_level_smoothed(in.layout(), in.theta_a, in.theta_u, oa, ou);
  auto st = unit_level_stacked_smoothed(in.layout(), in.theta_a, in.theta_u, oa, ou);
  Eigen::VectorXd both(5);
  both << a.values, u.values;
  EXPECT_LE((st.values - both).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(UnitLevelSmoothed, DimensionMismatchRejected) {
  std::mt19937_64 rng(4);
  auto in = random_unit_instance(rng, {2, 2});
  EXPECT_THROW(unit_level_smoothed(in.layout(), in.theta_u, in.theta_u,
                                   SmoothnessMatrix(in.omega_a), SmoothnessMatrix(in.omega_u)),
               ValidationError);
  EXPECT_THROW(unit_level_stacked_smoothed(in.layout(), in.theta_a, in.theta_u,
                                           SmoothnessMatrix(in.omega_u),
                                           SmoothnessMatrix(in.omega_u)),
               ValidationError);
}

TEST(UnitLevelBenchmarked, AlreadyAttainedConstraintsLeaveSolutionUnchanged) {
  std::mt19937_64 rng(5);
  auto in = random_unit_instance(rng, {2, 3});
  SmoothnessMatrix oa(in.omega_a), ou(in.omega_u);
  auto st = unit_level_stacked_smoothed(in.layout(), in.theta_a, in.theta_u, oa, ou);
  // Make the area values consistent with their units' means by construction.
  in.theta_a[0] = st.values.segment(2, 2).mean();
  in.theta_a[1] = st.values.segment(4, 3).mean();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 5);
  w.block(0, 0, 1, 2).setConstant(0.5);
  w.block(1, 2, 1, 3).setConstant(1.0 / 3);
  // With gamma_A = 0 the area block stays at theta_a, so the area constraint
  // group already holds at the smoothed solution.
  in.gamma_a = 0.0;
  auto s2 = unit_level_stacked_smoothed(in.layout(), in.theta_a, in.theta_u, oa, ou);
  ASSERT_LE(std::abs(s2.values[0] - s2.values.segment(2, 2).mean()), 1e-12);
  auto b = unit_level_benchmarked(in.layout(), in.theta_a, in.theta_u, oa, ou,
                                  Eigen::Vector2d(1, 0), s2.values[0], w);
  EXPECT_LE((b.values - s2.values).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(UnitLevelBenchmarked, FullyPinnedSingleArea) {
  UnitLevelLayout layout({2}, LossWeights::ones(1), LossWeights::ones(2), 0.5, 0.5);
  Eigen::MatrixXd ou(2, 2);
  ou << 2, -2, -2, 2;
  Eigen::MatrixXd w(1, 2);
  w << 0.5, 0.5;
  auto b = unit_level_benchmarked(layout, Eigen::VectorXd::Constant(1, 1.0),
                                  Eigen::Vector2d(4, 8), SmoothnessMatrix::zero(1),
                                  SmoothnessMatrix(ou), Eigen::VectorXd::Ones(1), 2.5, w);
  EXPECT_EQ(b.values[0], 2.5);
  EXPECT_NEAR(0.5 * (b.values[1] + b.values[2]), b.values[0], 1e-12);
}

TEST(UnitLevelBenchmarked, MatchesKktOracleOnTwoByTwo) {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    auto in = random_unit_instance(rng, {2, 2});
    Eigen::MatrixXd w = within_area_weights(rng, in.n);
    Eigen::VectorXd eta = oracle::random_vector(rng, 2, 0.1, 1.0);
    const double t_a = std::uniform_real_distribution<double>(-3, 3)(rng);
    SmoothnessMatrix oa(in.omega_a), ou(in.omega_u);
    auto b = unit_level_benchmarked(in.layout(), in.theta_a, in.theta_u, oa, ou, eta, t_a, w);

    // Oracle over the six stacked coordinates with each level's own penalty.
    Eigen::VectorXd theta(6), phi(6);
    theta << in.theta_a, in.theta_u;
    phi << in.phi, in.xi;
    Eigen::MatrixXd pen = Eigen::MatrixXd::Zero(6, 6);
    pen.topLeftCorner(2, 2) = in.gamma_a * in.omega_a;
    pen.bottomRightCorner(4, 4) = in.gamma_u * in.omega_u;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 6);
    m(0, 0) = eta[0];
    m(0, 1) = eta[1];
    m(1, 0) = -1;
    m(1, 2) = w(0, 0);
    m(1, 3) = w(0, 1);
    m(2, 1) = -1;
    m(2, 4) = w(1, 2);
    m(2, 5) = w(1, 3);
    Eigen::Vector3d t(t_a, 0, 0);
    auto kkt = oracle::kkt_solve(theta, phi, pen, 1.0, m, t);
    EXPECT_LE((b.values - kkt).lpNorm<Eigen::Infinity>(), 1e-8) << rep;

    EXPECT_LE(std::abs(eta.dot(b.values.head(2)) - t_a), 1e-8);
    EXPECT_LE(std::abs(w.row(0).dot(b.values.tail(4)) - b.values[0]), 1e-8);
    EXPECT_LE(std::abs(w.row(1).dot(b.values.tail(4)) - b.values[1]), 1e-8);
  }
}

TEST(UnitLevelConstraints, ShapeAndNestingCheck) {
  UnitLevelLayout layout({2, 1}, LossWeights::ones(2), LossWeights::ones(3), 1, 1);
  Eigen::MatrixXd w(2, 3);
  w << 0.5, 0.5, 0, 0, 0, 1;
  auto c = unit_level_constraints(layout, Eigen::Vector2d(0.3, 0.7), 4.0, w);
  Eigen::MatrixXd expected(3, 5);
  expected << 0.3, 0.7, 0, 0, 0,
              -1, 0, 0.5, 0.5, 0,
              0, -1, 0, 0, 1;
  EXPECT_TRUE(c.matrix() == expected);
  EXPECT_TRUE(c.targets() == Eigen::Vector3d(4, 0, 0));

  Eigen::MatrixXd leaky = w;
  leaky(0, 2) = 0.1;
  EXPECT_THROW(unit_level_constraints(layout, Eigen::Vector2d(0.3, 0.7), 4.0, leaky),
               ValidationError);
}

TEST(UnitLevelBenchmarked, ZeroEtaIsRankDeficient) {
  std::mt19937_64 rng(7);
  auto in = random_unit_instance(rng, {2, 2});
  Eigen::MatrixXd w = within_area_weights(rng, in.n);
  EXPECT_THROW(unit_level_benchmarked(in.layout(), in.theta_a, in.theta_u,
                                      SmoothnessMatrix(in.omega_a), SmoothnessMatrix(in.omega_u),
                                      Eigen::Vector2d::Zero(), 1.0, w),
               ValidationError);
}
