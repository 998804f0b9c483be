#include "cier/error.hpp"
#include "cier/ticc.hpp"
#include "cier/toeplitz_glasso.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace cier;
using namespace cier::ticc;

namespace {

int switches(const std::vector<int>& labels) {
  int s = 0;
  for (std::size_t i = 1; i < labels.size(); ++i) s += labels[i] != labels[i - 1];
  return s;
}

Eigen::MatrixXd random_spd(int p, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) a(i, j) = g(rng);
  return a * a.transpose() + p * Eigen::MatrixXd::Identity(p, p);
}

ScopedWarningSink quiet() {
  return ScopedWarningSink([](std::string_view) {});
}

}  // namespace

TEST_CASE("adaptive_k follows the target length and clamps") {
  CHECK(adaptive_k(100) == 4);
  CHECK(adaptive_k(10) == 2);
  CHECK(adaptive_k(1000) == 10);
  AdaptiveKConfig cfg;
  cfg.target_length = 10;
  CHECK(adaptive_k(50, cfg) == 5);
  CHECK(adaptive_k(4, cfg) == 1);  // n - w caps the count
}

TEST_CASE("log_likelihood at the mode of a standard normal") {
  ClusterModel m{Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), 0};
  const double c = 0.5 * std::log(2.0 * std::numbers::pi);
  CHECK(log_likelihood(Eigen::VectorXd::Zero(1), m) == doctest::Approx(-c).epsilon(1e-12));
  CHECK(log_likelihood(Eigen::VectorXd::Ones(1), m) == doctest::Approx(-0.5 - c).epsilon(1e-12));
  CHECK(-c == doctest::Approx(-0.9189).epsilon(1e-4));
}

TEST_CASE("log_likelihood agrees with a dense covariance evaluation") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd precision = random_spd(3, rng);
    Eigen::VectorXd mean(3), x(3);
    for (int i = 0; i < 3; ++i) {
      mean(i) = g(rng);
      x(i) = g(rng);
    }
    const Eigen::MatrixXd cov = precision.inverse();
    const Eigen::VectorXd d = x - mean;
    const double oracle = -0.5 * d.dot(cov.inverse() * d) - 0.5 * std::log(cov.determinant()) -
                          1.5 * std::log(2.0 * std::numbers::pi);
    CHECK(log_likelihood(x, {precision, mean, 0}) == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("log_likelihood rejects a non-PD precision") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(log_likelihood(Eigen::VectorXd::Zero(2), {bad, Eigen::VectorXd::Zero(2), 0}), Error);
}

TEST_CASE("assign_labels matches exhaustive enumeration") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::uniform_int_distribution<int> len(1, 12);
  std::uniform_int_distribution<int> kk(1, 3);
  for (int rep = 0; rep < 200; ++rep) {
    const int T = len(rng);
    const int K = kk(rng);
    Eigen::MatrixXd cost(T, K);
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k) cost(t, k) = u(rng);
    const double beta = u(rng);
    const auto dp = assign_labels(cost, beta);
    const auto oracle = testing::brute_force_labels(cost, beta);
    CHECK(dp == oracle);
    CHECK(labeling_objective(cost, dp, beta) == doctest::Approx(labeling_objective(cost, oracle, beta)));
  }
}

TEST_CASE("label_runs splits maximal runs") {
  const auto runs = label_runs({0, 0, 1, 1, 1, 0});
  REQUIRE(runs.size() == 3);
  CHECK(runs[1].label == 1);
  CHECK(runs[1].start == 2);
  CHECK(runs[1].end == 4);
  CHECK(runs[2].start == 5);
}

TEST_CASE("TiccParams validation") {
  TiccParams p;
  p.K = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.beta = -1;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.w = 400;
  const auto data = testing::two_regime_series(0);
  try {
    fit_ticc(data.series, p);
    FAIL("expected NotEnoughData");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotEnoughData);
  }
}

TEST_CASE("fit_ticc recovers two correlation regimes") {
  auto silence = quiet();
  const auto data = testing::two_regime_series(1);
  TiccParams p;
  p.K = 2;
  p.beta = 50;
  p.seed = 1;
  const auto fit = fit_ticc(data.series, p);
  REQUIRE(fit.segmentation.labels.size() == 298);
  CHECK(testing::macro_f1(fit.segmentation.labels, data.frame_labels, 2) >= 0.9);
  for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
    if (!fit.reseeded[i]) CHECK(fit.objective_trace[i] <= fit.objective_trace[i - 1] + 1e-9);
  }
  for (const auto& m : fit.models) {
    CHECK(is_positive_definite(m.precision));
    CHECK(toeplitz_deviation(m.precision, 2) < 1e-8);
  }
}

TEST_CASE("fit_ticc with K=1 gives one segment") {
  auto silence = quiet();
  const auto data = testing::two_regime_series(2);
  TiccParams p;
  p.K = 1;
  const auto fit = fit_ticc(data.series, p);
  CHECK(switches(fit.segmentation.labels) == 0);
  REQUIRE(fit.segmentation.segments.size() == 1);
  CHECK(fit.segmentation.segments[0].start == 0);
  CHECK(fit.segmentation.segments[0].end == 297);
}

TEST_CASE("a large switch penalty never adds switches") {
  auto silence = quiet();
  const auto data = testing::regime_series(4, {{0, 80}, {1, 80}, {0, 80}});
  TiccParams p;
  p.K = 3;
  p.seed = 4;
  p.beta = 0;
  const int free_switches = switches(fit_ticc(data.series, p).segmentation.labels);
  p.beta = 1e6;
  const int penalized = switches(fit_ticc(data.series, p).segmentation.labels);
  CHECK(penalized <= free_switches);
  CHECK(penalized <= p.K - 1);
}

TEST_CASE("fit_ticc is deterministic for a seed") {
  auto silence = quiet();
  const auto data = testing::two_regime_series(5);
  TiccParams p;
  p.seed = 9;
  CHECK(fit_ticc(data.series, p).segmentation.labels == fit_ticc(data.series, p).segmentation.labels);
}

TEST_CASE("block-Toeplitz projection is idempotent and symmetric") {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd m = random_spd(6, rng);
  const Eigen::MatrixXd once = project_block_toeplitz(m, 2);
  CHECK(toeplitz_deviation(once, 2) < 1e-12);
  CHECK((project_block_toeplitz(once, 2) - once).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((once - once.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("unpenalized glasso with a single block inverts the covariance") {
  std::mt19937_64 rng(12);
  const Eigen::MatrixXd s = random_spd(6, rng);
  AdmmOptions opt;
  opt.max_iters = 5000;
  opt.tol = 1e-10;
  const auto r = solve_toeplitz_glasso(s, 6, 0.0, opt);
  CHECK(is_positive_definite(r.precision));
  CHECK((r.precision * s - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("a heavy L1 penalty yields a diagonal precision") {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd s = project_block_toeplitz(random_spd(4, rng), 2);
  const auto r = solve_toeplitz_glasso(s, 2, 1e3);
  const Eigen::MatrixXd off = r.precision - Eigen::MatrixXd(r.precision.diagonal().asDiagonal());
  CHECK(off.cwiseAbs().maxCoeff() < 1e-8);
  CHECK(is_positive_definite(r.precision));
}
