#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "cbsae/estimators.hpp"
#include "cbsae/fay_herriot.hpp"
#include "cbsae/graph_smoothness.hpp"
#include "cbsae/model_selection.hpp"
#include "cbsae/synthetic.hpp"

namespace {

using namespace cbsae;

struct Problem {
  Eigen::VectorXd theta;
  LossWeights phi;
  SmoothnessMatrix omega;
  Eigen::VectorXd w;
};

SimilaritySpec ring(std::size_t m) {
  std::vector<SimilarityEntry> edges;
  for (std::size_t i = 0; i < m; ++i) edges.push_back({i, (i + 1) % m, 1.0});
  for (std::size_t i = 0; i + 7 < m; i += 7) edges.push_back({i, i + 7, 0.5});
  return SimilaritySpec::from_edges(m, edges);
}

Problem make_problem(std::size_t m) {
  std::mt19937_64 rng(42 + m);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::normal_distribution<double> n01;
  Problem p;
  p.theta.resize(static_cast<Eigen::Index>(m));
  Eigen::VectorXd phi(static_cast<Eigen::Index>(m));
  p.w.resize(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < p.theta.size(); ++i) {
    p.theta[i] = 10.0 + n01(rng);
    phi[i] = u(rng);
    p.w[i] = u(rng);
  }
  p.w /= p.w.sum();
  p.phi = LossWeights(phi);
  p.omega = build_omega(ring(m));
  return p;
}

void BM_BuildOmega(benchmark::State& state) {
  const auto spec = ring(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_omega(spec));
}
BENCHMARK(BM_BuildOmega)->Arg(51)->Arg(200)->Arg(800);

void BM_Smoothed(benchmark::State& state) {
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(smoothed_estimate(p.theta, p.phi, p.omega, 0.1));
  }
}
BENCHMARK(BM_Smoothed)->Arg(51)->Arg(200)->Arg(800);

void BM_BenchmarkedSingle(benchmark::State& state) {
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        benchmarked_estimate_single(p.theta, p.phi, p.omega, 0.1, p.w, 10.0));
  }
}
BENCHMARK(BM_BenchmarkedSingle)->Arg(51)->Arg(200)->Arg(800);

void BM_BenchmarkedGeneral(benchmark::State& state) {
  const auto p = make_problem(static_cast<std::size_t>(state.range(0)));
  const auto constraints = ConstraintSet::single(p.w, 10.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(benchmarked_estimate(p.theta, p.phi, p.omega, 0.1, constraints));
  }
}
BENCHMARK(BM_BenchmarkedGeneral)->Arg(51)->Arg(200)->Arg(800);

void BM_CrossValidate(benchmark::State& state) {
  const auto p = make_problem(51);
  const auto grid = log_grid(1e-3, 1e1, 20);
  const std::optional<ConstraintSet> constraints =
      state.range(0) ? std::optional(ConstraintSet::single(p.w, 10.0)) : std::nullopt;
  const auto threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cross_validate(p.theta, p.phi, p.omega, grid, constraints, threads));
  }
}
BENCHMARK(BM_CrossValidate)->Args({0, 1})->Args({1, 1})->Args({1, 4})->Unit(benchmark::kMillisecond);

void BM_Gibbs(benchmark::State& state) {
  const auto m = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u(0.5, 2.0);
  Eigen::MatrixXd x(m, 3);
  Eigen::VectorXd d(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = n01(rng);
    x(i, 2) = n01(rng);
    d[i] = u(rng);
  }
  const auto draw = simulate_fay_herriot(x, Eigen::Vector3d(2, -1, 0.5), 1.0, d, 11);
  AreaDataset data;
  for (Eigen::Index i = 0; i < m; ++i) data.labels.push_back("a" + std::to_string(i));
  data.y = draw.y;
  data.sampling_variance = d;
  data.covariates = x;
  data.covariate_names = {"x0", "x1", "x2"};
  GibbsConfig cfg;
  cfg.n_iter = 2'000;
  cfg.n_burn = 500;
  cfg.seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(gibbs_fit(data, cfg));
}
BENCHMARK(BM_Gibbs)->Arg(51)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
