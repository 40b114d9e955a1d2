// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "cbsae/bootstrap.hpp"
#include "cbsae/config.hpp"
#include "cbsae/estimators.hpp"
#include "cbsae/fay_herriot.hpp"
#include "cbsae/model_selection.hpp"
#include "cbsae/pipeline.hpp"
#include "cbsae/synthetic.hpp"
#include "cbsae/unit_level.hpp"
#include "oracles.hpp"

using namespace cbsae;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

void append(std::string& s, const char* fmt, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, v);
  s += buf;
}

Outcome laplacian_identity() {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> size(1, 10);
  double worst_rel = 0, worst_kernel = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int m = size(rng);
    Eigen::MatrixXd q = oracle::random_similarity(rng, m, 0.5);
    auto omega = build_omega(SimilaritySpec::from_dense(q));
    Eigen::VectorXd d = oracle::random_vector(rng, m, -3, 3);
    const double exact = oracle::double_sum_penalty(q, d);
    const double rel = std::abs(omega.quadratic_form(d) - exact) / std::max(1.0, std::abs(exact));
    worst_rel = std::max(worst_rel, rel);
    worst_kernel = std::max(
        worst_kernel, (omega.matrix() * Eigen::VectorXd::Ones(m)).lpNorm<Eigen::Infinity>());

    Eigen::MatrixXd a = oracle::random_similarity(rng, m, 0.5, true);
    Eigen::MatrixXd lap = -a;
    lap.diagonal() = a.rowwise().sum();
    out.require(build_omega(SimilaritySpec::from_dense(a)).matrix() == 2.0 * lap,
                "Omega != 2L for a 0/1 adjacency");
  }
  const double secs = seconds_since(t0);
  out.require(worst_rel <= 1e-10, "double-sum mismatch");
  out.require(worst_kernel <= 1e-12, "Omega 1 != 0");
  out.require(secs < 5.0, "runtime over 5 s");
  append(out.detail, " max_rel=%.3g", worst_rel);
  append(out.detail, " max_|Omega*1|=%.3g", worst_kernel);
  append(out.detail, " time=%.2fs", secs);
  return out;
}

Outcome closed_form_vs_kkt() {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1002);
  std::normal_distribution<double> n01;
  double worst_kkt = 0, worst_adjust = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const int m = std::uniform_int_distribution<int>(2, 12)(rng);
    const int k = std::uniform_int_distribution<int>(1, std::min(3, m))(rng);
    Eigen::VectorXd theta = oracle::random_vector(rng, m, -10, 10);
    Eigen::VectorXd phi = oracle::random_vector(rng, m, 0.2, 5);
    auto omega = build_omega(SimilaritySpec::from_dense(oracle::random_similarity(rng, m, 0.4)));
    const double gamma = std::exp(std::uniform_real_distribution<double>(-7, 4.6)(rng));
    Eigen::MatrixXd mm(k, m);
    for (auto& x : mm.reshaped()) x = n01(rng);
    Eigen::VectorXd t = oracle::random_vector(rng, k, -5, 5);

    auto s = smoothed_estimate(theta, LossWeights(phi), omega, gamma);
    auto b = benchmarked_estimate(theta, LossWeights(phi), omega, gamma, ConstraintSet(mm, t));
    worst_kkt = std::max(worst_kkt, (s.values - oracle::kkt_solve(theta, phi, omega.matrix(), gamma))
                                        .lpNorm<Eigen::Infinity>());
    worst_kkt = std::max(worst_kkt, (b.values - oracle::kkt_solve(theta, phi, omega.matrix(), gamma, mm, t))
                                        .lpNorm<Eigen::Infinity>());

    Eigen::MatrixXd sigma = gamma * omega.matrix();
    sigma.diagonal() += phi;
    Eigen::MatrixXd sm = sigma.ldlt().solve(mm.transpose());
    Eigen::VectorXd adj = s.values + sm * (mm * sm).ldlt().solve(t - mm * s.values);
    worst_adjust = std::max(worst_adjust, (b.values - adj).lpNorm<Eigen::Infinity>() /
                                              (1 + b.values.lpNorm<Eigen::Infinity>()));
  }
  const double secs = seconds_since(t0);
  out.require(worst_kkt <= 1e-8, "closed form differs from KKT solve");
  out.require(worst_adjust <= 1e-10, "adjustment identity violated");
  out.require(secs < 10.0, "runtime over 10 s");
  append(out.detail, " max_kkt=%.3g", worst_kkt);
  append(out.detail, " max_adjust=%.3g", worst_adjust);
  append(out.detail, " time=%.2fs", secs);
  return out;
}

Outcome worked_example() {
  Outcome out;
  Eigen::Matrix2d om;
  om << 2, -2, -2, 2;
  SmoothnessMatrix omega(om);
  Eigen::Vector2d theta(1, 3);
  auto s = smoothed_estimate(theta, LossWeights::ones(2), omega, 1.0);
  auto b = benchmarked_estimate(theta, LossWeights::ones(2), omega, 1.0,
                                ConstraintSet::single(Eigen::Vector2d(0.5, 0.5), 3.0));
  auto b1 = benchmarked_estimate_single(theta, LossWeights::ones(2), omega, 1.0,
                                        Eigen::Vector2d(0.5, 0.5), 3.0);
  const double es = (s.values - Eigen::Vector2d(9.0 / 5, 11.0 / 5)).lpNorm<Eigen::Infinity>();
  const double eb = std::max((b.values - Eigen::Vector2d(14.0 / 5, 16.0 / 5)).lpNorm<Eigen::Infinity>(),
                             (b1.values - Eigen::Vector2d(14.0 / 5, 16.0 / 5)).lpNorm<Eigen::Infinity>());
  const double res = std::max(b.constraint_residual, b1.constraint_residual);
  out.require(es <= 1e-12, "smoothed values wrong");
  out.require(eb <= 1e-12, "benchmarked values wrong");
  out.require(res <= 1e-12, "constraint residual above 1e-12");
  append(out.detail, " err_S=%.3g", es);
  append(out.detail, " err_BM=%.3g", eb);
  append(out.detail, " residual=%.3g", res);
  return out;
}

Outcome limits() {
  Outcome out;
  std::mt19937_64 rng(1004);
  bool exact_zero = true;
  double worst_mean = 0;
  int monotone_failures = 0;
  std::vector<double> grid;
  for (int k = 0; k < 10; ++k) grid.push_back(std::pow(10.0, -4 + 0.7 * k));
  for (int rep = 0; rep < 20; ++rep) {
    const int m = 3 + rep % 10;
    Eigen::MatrixXd q = oracle::path_similarity(m) + oracle::random_similarity(rng, m, 0.3);
    Eigen::VectorXd theta = oracle::random_vector(rng, m, -10, 10);
    Eigen::VectorXd phi = oracle::random_vector(rng, m, 0.2, 5);
    auto omega = build_omega(SimilaritySpec::from_dense(q));
    exact_zero &= smoothed_estimate(theta, LossWeights(phi), omega, 0.0).values == theta;
    auto big = smoothed_estimate(theta, LossWeights(phi), omega, 1e8).values;
    worst_mean = std::max(worst_mean, (big.array() - phi.dot(theta) / phi.sum()).abs().maxCoeff());
    double prev = std::numeric_limits<double>::infinity();
    for (double g : grid) {
      const double r = omega.quadratic_form(smoothed_estimate(theta, LossWeights(phi), omega, g).values);
      if (r > prev * (1 + 1e-12) + 1e-14) ++monotone_failures;
      prev = r;
    }
  }
  out.require(exact_zero, "gamma = 0 did not return theta exactly");
  out.require(worst_mean <= 1e-3, "gamma = 1e8 not at the weighted mean");
  out.require(monotone_failures == 0, "roughness increased with gamma");
  append(out.detail, " max_dev_from_mean@1e8=%.3g", worst_mean);
  append(out.detail, " monotonicity_violations=%.0f", monotone_failures);
  return out;
}

Outcome unit_level() {
  Outcome out;
  std::mt19937_64 rng(1005);
  double worst_stack = 0, worst_constraint = 0, worst_kkt = 0;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::size_t> n{1 + static_cast<std::size_t>(rep % 3), 2, 1 + static_cast<std::size_t>(rep % 4)};
    std::size_t total = 0;
    for (auto k : n) total += k;
    const auto nt = static_cast<Eigen::Index>(total);
    Eigen::VectorXd phi = oracle::random_vector(rng, 3, 0.3, 3), xi = oracle::random_vector(rng, nt, 0.3, 3);
    Eigen::VectorXd ta = oracle::random_vector(rng, 3, -5, 5), tu = oracle::random_vector(rng, nt, -5, 5);
    auto oa = build_omega(SimilaritySpec::from_dense(oracle::random_similarity(rng, 3, 0.7)));
    auto ou = build_omega(SimilaritySpec::from_dense(oracle::random_similarity(rng, nt, 0.5)));
    UnitLevelLayout layout(n, LossWeights(phi), LossWeights(xi), 0.1 + rep * 0.05, 2.0 - rep * 0.03);
    auto [a, u] = unit_level_smoothed(layout, ta, tu, oa, ou);
    auto st = unit_level_stacked_smoothed(layout, ta, tu, oa, ou);
    worst_stack = std::max({worst_stack, (st.values.head(3) - a.values).lpNorm<Eigen::Infinity>(),
                            (st.values.tail(nt) - u.values).lpNorm<Eigen::Infinity>()});
  }
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd phi = oracle::random_vector(rng, 2, 0.3, 3), xi = oracle::random_vector(rng, 4, 0.3, 3);
    Eigen::VectorXd ta = oracle::random_vector(rng, 2, -5, 5), tu = oracle::random_vector(rng, 4, -5, 5);
    Eigen::MatrixXd qa = oracle::random_similarity(rng, 2, 0.8), qu = oracle::random_similarity(rng, 4, 0.6);
    const double ga = std::uniform_real_distribution<double>(0.05, 3)(rng);
    const double gu = std::uniform_real_distribution<double>(0.05, 3)(rng);
    UnitLevelLayout layout({2, 2}, LossWeights(phi), LossWeights(xi), ga, gu);
    Eigen::VectorXd eta = oracle::random_vector(rng, 2, 0.1, 1);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 4);
    w.block(0, 0, 1, 2) = oracle::random_vector(rng, 2, 0.1, 1).transpose();
    w.block(1, 2, 1, 2) = oracle::random_vector(rng, 2, 0.1, 1).transpose();
    const double t_a = std::uniform_real_distribution<double>(-3, 3)(rng);
    auto b = unit_level_benchmarked(layout, ta, tu, build_omega(SimilaritySpec::from_dense(qa)),
                                    build_omega(SimilaritySpec::from_dense(qu)), eta, t_a, w);
    worst_constraint = std::max({worst_constraint, std::abs(eta.dot(b.values.head(2)) - t_a),
                                 std::abs(w.row(0).dot(b.values.tail(4)) - b.values[0]),
                                 std::abs(w.row(1).dot(b.values.tail(4)) - b.values[1])});
    Eigen::VectorXd theta(6), p(6);
    theta << ta, tu;
    p << phi, xi;
    Eigen::MatrixXd pen = Eigen::MatrixXd::Zero(6, 6);
    pen.topLeftCorner(2, 2) = ga * oracle::polarized_omega(qa);
    pen.bottomRightCorner(4, 4) = gu * oracle::polarized_omega(qu);
    Eigen::MatrixXd mm = Eigen::MatrixXd::Zero(3, 6);
    mm.block(0, 0, 1, 2) = eta.transpose();
    mm(1, 0) = mm(2, 1) = -1;
    mm.block(1, 2, 2, 4) = w;
    auto kkt = oracle::kkt_solve(theta, p, pen, 1.0, mm, Eigen::Vector3d(t_a, 0, 0));
    worst_kkt = std::max(worst_kkt, (b.values - kkt).lpNorm<Eigen::Infinity>());
  }
  out.require(worst_stack <= 1e-12, "stacked solve differs from per-level solves");
  out.require(worst_constraint <= 1e-8, "unit-level constraints not met");
  out.require(worst_kkt <= 1e-8, "unit-level benchmark differs from KKT solve");
  append(out.detail, " max_stack=%.3g", worst_stack);
  append(out.detail, " max_constraint=%.3g", worst_constraint);
  append(out.detail, " max_kkt=%.3g", worst_kkt);
  return out;
}

AreaDataset recovery_dataset(std::uint64_t seed, const Eigen::VectorXd& beta, double sigma_u2) {
  const int m = 200;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd x(m, beta.size());
  x.col(0).setOnes();
  for (Eigen::Index j = 1; j < beta.size(); ++j)
    for (int i = 0; i < m; ++i) x(i, j) = n01(rng);
  Eigen::VectorXd d = oracle::random_vector(rng, m, 0.3, 2.0);
  AreaDataset data;
  data.y = simulate_fay_herriot(x, beta, sigma_u2, d, derive_seed(seed, 7)).y;
  data.sampling_variance = d;
  data.covariates = x;
  for (int i = 0; i < m; ++i) data.labels.push_back("a" + std::to_string(i));
  for (Eigen::Index j = 0; j < beta.size(); ++j) data.covariate_names.push_back("x" + std::to_string(j));
  return data;
}

Outcome gibbs_recovery() {
  Outcome out;
  const auto t0 = Clock::now();
  const Eigen::Vector3d beta(2.0, -1.0, 0.5);
  const double sigma_u2 = 1.0;
  int covered = 0;
  int fixed_exceed = 0, fixed_total = 0;
  double worst_z = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto data = recovery_dataset(seed, beta, sigma_u2);
    GibbsConfig cfg;
    cfg.seed = derive_seed(seed, 100);
    const auto post = gibbs_fit(data, cfg);
    covered += (((post.beta_mean - beta).array().abs() / post.beta_sd.array()) <= 4.0).all();

    GibbsConfig fixed = cfg;
    fixed.seed = derive_seed(seed, 200);
    fixed.fixed_sigma_u2 = sigma_u2;
    const auto fpost = gibbs_fit(data, fixed);
    const auto exact = oracle::conjugate_theta_mean(data.covariates, data.y, data.sampling_variance, sigma_u2);
    const Eigen::ArrayXd z = (fpost.theta_bayes - exact).array().abs() / fpost.theta_mcse.array();
    fixed_exceed += static_cast<int>((z > 3.0).count());
    fixed_total += static_cast<int>(z.size());
    worst_z = std::max(worst_z, z.maxCoeff());
  }
  const double secs = seconds_since(t0);
  out.require(covered >= 19, "beta coverage below 19/20");
  out.require(fixed_exceed == 0, "fixed-sigma posterior mean outside 3 MC standard errors");
  out.require(secs < 120.0, "runtime over 2 min");
  append(out.detail, " beta_within_4sd=%.0f/20", covered);
  append(out.detail, " fixed_sigma_exceedances=%.0f", fixed_exceed);
  append(out.detail, "/%.0f", fixed_total);
  append(out.detail, " (expected by chance %.1f)", 0.0027 * fixed_total);
  append(out.detail, " max_z=%.2f", worst_z);
  append(out.detail, " time=%.1fs", secs);
  return out;
}

Outcome cv_correctness() {
  Outcome out;
  Eigen::Matrix2d om;
  om << 2, -2, -2, 2;
  const Eigen::Vector2d theta(1, 3);
  const std::vector<double> grid{0.5, 1.0, 2.0};
  auto curve = cross_validate(theta, LossWeights::ones(2), SmoothnessMatrix(om), grid);
  double worst = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    // Held-out oracle: with area i's loss gone, the penalty is minimized by
    // delta_i = delta_j, and the remaining loss by delta_j = theta_j. Checked
    // against coordinate descent on the zero-weight problem.
    double v = 0;
    for (int i = 0; i < 2; ++i) {
      Eigen::Vector2d p(1, 1);
      p[i] = 0;
      Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2, 2);
      q(0, 1) = q(1, 0) = 1;
      const double held = oracle::gauss_seidel_smoother(theta, p, q, grid[k])[i];
      const double r = held - theta[i];
      v += r * r;
    }
    v /= 2;
    worst = std::max({worst, std::abs(curve.scores[k] - v), std::abs(curve.scores[k] - 4.0)});
  }
  out.require(worst <= 1e-9, "toy V(gamma) differs from the held-out oracle");

  std::mt19937_64 rng(1007);
  int argmin_violations = 0;
  auto check = [&](const CvCurve& c) {
    for (double s : c.scores)
      if (c.best_score > s) ++argmin_violations;
  };
  check(curve);
  auto g = log_grid(1e-3, 1e2, 15);
  for (int rep = 0; rep < 20; ++rep) {
    const int m = 4 + rep % 8;
    Eigen::MatrixXd q = oracle::path_similarity(m) + oracle::random_similarity(rng, m, 0.3);
    Eigen::VectorXd th = oracle::random_vector(rng, m, -5, 5);
    Eigen::VectorXd phi = oracle::random_vector(rng, m, 0.3, 3);
    auto omega = build_omega(SimilaritySpec::from_dense(q));
    check(cross_validate(th, LossWeights(phi), omega, g));
    Eigen::VectorXd w = oracle::random_vector(rng, m, 0.1, 1);
    check(cross_validate(th, LossWeights(phi), omega, g, ConstraintSet::single(w, 1.0)));
  }
  out.require(argmin_violations == 0, "V(gamma_hat) > V(gamma) somewhere");
  if (curve.gamma_hat != 0.5) out.require(false, "tie not broken toward smallest gamma");
  append(out.detail, " max_toy_err=%.3g", worst);
  append(out.detail, " argmin_violations=%.0f", argmin_violations);
  return out;
}

Outcome bootstrap_checks() {
  Outcome out;
  // Fit closure: a short Gibbs chain plus smoothed benchmark on a 12-area path.
  const int m = 12;
  std::mt19937_64 rng(1008);
  AreaDataset data;
  data.covariates = Eigen::MatrixXd::Ones(m, 2);
  data.covariates.col(1) = oracle::random_vector(rng, m, -1, 1);
  data.covariate_names = {"(intercept)", "x"};
  data.sampling_variance = oracle::random_vector(rng, m, 0.3, 1.5);
  data.y = simulate_fay_herriot(data.covariates, Eigen::Vector2d(4, 1), 0.5, data.sampling_variance, 3).y;
  for (int i = 0; i < m; ++i) data.labels.push_back("s" + std::to_string(i));
  auto omega = build_omega(SimilaritySpec::from_dense(oracle::path_similarity(m)));
  LossWeights phi(data.sampling_variance.cwiseInverse());
  Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / m);
  const double t = data.y.mean();
  ReplicateFit fit = [&](const Eigen::VectorXd& y, std::uint64_t seed) {
    GibbsConfig cfg;
    cfg.n_iter = 500;
    cfg.n_burn = 100;
    cfg.seed = seed;
    auto post = gibbs_fit(data.with_response(y), cfg);
    return benchmarked_estimate_single(post.theta_bayes, phi, omega, 0.3, w, t).values;
  };
  const Eigen::VectorXd theta_bm = fit(data.y, 5);
  const Eigen::VectorXd sigma = data.sampling_variance.cwiseSqrt();
  BootstrapConfig cfg;
  cfg.replicates = 100;
  cfg.seed = 77;
  auto a = bootstrap_mse(data.y, theta_bm, sigma, fit, cfg);
  auto b = bootstrap_mse(data.y, theta_bm, sigma, fit, cfg);
  cfg.threads = 4;
  auto c = bootstrap_mse(data.y, theta_bm, sigma, fit, cfg);
  const bool identical = a.replicates == b.replicates && a.mse == b.mse && a.bias == b.bias &&
                         a.replicates == c.replicates && a.mse == c.mse;
  out.require(identical, "reports differ under identical seeds");
  double worst_decomp = 0;
  for (const auto* r : {&a, &b, &c})
    worst_decomp = std::max(worst_decomp,
                            (r->mse - (r->bias.cwiseAbs2() + r->variance)).lpNorm<Eigen::Infinity>());
  out.require(worst_decomp <= 1e-10, "MSE != bias^2 + variance");
  out.require((a.mse.array() >= 0).all(), "negative MSE");

  // Resampling frequencies through the driver itself: with theta = 0 and unit
  // sd, each replicate row is the resampled residual vector.
  const Eigen::VectorXd resid = (Eigen::VectorXd(5) << -2, -1, 0, 1, 2).finished();
  const ReplicateFit identity = [](const Eigen::VectorXd& y, std::uint64_t) { return y; };
  const double crit =
      boost::math::quantile(boost::math::complement(boost::math::chi_squared(4.0), 0.001));
  int passes = 0;
  double worst_stat = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    BootstrapConfig bc;
    bc.replicates = 10'000;
    bc.seed = seed;
    auto r = bootstrap_mse(resid, Eigen::VectorXd::Zero(5), Eigen::VectorXd::Ones(5), identity, bc);
    std::array<double, 5> counts{};
    for (double v : r.replicates.reshaped()) counts[static_cast<std::size_t>(v + 2)] += 1;
    const double expected = 10'000.0 * 5 / 5;
    double stat = 0;
    for (double k : counts) stat += (k - expected) * (k - expected) / expected;
    passes += stat <= crit;
    worst_stat = std::max(worst_stat, stat);
  }
  out.require(passes >= 19, "chi-square check passed in fewer than 19 of 20 seeds");
  append(out.detail, " max_decomp=%.3g", worst_decomp);
  append(out.detail, " chisq_passes=%.0f/20", passes);
  append(out.detail, " max_stat=%.2f", worst_stat);
  append(out.detail, " crit=%.2f", crit);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome end_to_end() {
  Outcome out;
  auto config = load_config(fs::path(CBSAE_DATA_DIR) / "saipe_synthetic.cfg");
  out.require(config.gamma_grid && config.gamma_grid->n == 40, "fixture config is not a 40-point grid");
  out.require(config.bootstrap_reps == 200, "fixture config is not B = 200");
  const auto base = fs::temp_directory_path() / "cbsae_acceptance";
  fs::remove_all(base);

  const auto t0 = Clock::now();
  const auto report = run_pipeline(config);
  write_report(report, base / "a");
  const double secs = seconds_since(t0);

  const auto again = run_pipeline(config);
  write_report(again, base / "b");
  bool stable = true;
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    const auto name = entry.path().filename();
    stable &= fs::exists(base / "b" / name) && slurp(entry.path()) == slurp(base / "b" / name);
  }
  out.require(stable, "report files differ between identical runs");

  const double t = *config.benchmark_target;
  const double residual = report.constraint_residual.value_or(1.0);
  out.require(report.areas() == 51, "expected 51 areas");
  out.require(residual <= 1e-8, "benchmark residual above 1e-8");
  out.require(residual <= 1e-8 * (1 + std::abs(t)), "benchmark residual above report bound");
  out.require(report.bootstrap && report.bootstrap->successful == 200, "bootstrap replicates failed");
  out.require(report.bootstrap && (report.bootstrap->mse.array() >= 0).all(), "negative MSE");
  out.require(secs < 300.0, "run took 5 minutes or more");
  append(out.detail, " gamma_hat=%.6g", report.gamma);
  append(out.detail, " residual=%.3g", residual);
  append(out.detail, " time=%.1fs", secs);
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 laplacian identity suite", laplacian_identity},
      {"2 closed form vs KKT oracle", closed_form_vs_kkt},
      {"3 worked two-area example", worked_example},
      {"4 gamma limits and roughness monotonicity", limits},
      {"5 unit-level consistency", unit_level},
      {"6 Gibbs recovery", gibbs_recovery},
      {"7 cross-validation correctness", cv_correctness},
      {"8 bootstrap determinism and decomposition", bootstrap_checks},
      {"9 end-to-end fixture run", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %s:%s%s\n", o.pass ? "PASS" : "FAIL", name,
                o.detail.empty() || o.detail[0] == ' ' ? "" : " ", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed;
}
