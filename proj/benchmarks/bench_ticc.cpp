#include "cier/error.hpp"
#include "cier/ticc.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

// Independent frames followed by strongly correlated ones.
cier::series::ActionTimeSeries two_regimes(Eigen::Index length) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  cier::series::ActionTimeSeries s;
  s.frames.resize(length, 2);
  for (Eigen::Index t = 0; t < length; ++t) {
    const double a = g(rng), b = g(rng);
    s.frames(t, 0) = a;
    s.frames(t, 1) = t < length / 2 ? b : 0.9 * a + 0.436 * b;
  }
  return s;
}

void BM_AssignLabels(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  const Eigen::MatrixXd cost = Eigen::MatrixXd::NullaryExpr(state.range(0), 4, [&] { return u(rng); });
  for (auto _ : state) benchmark::DoNotOptimize(cier::ticc::assign_labels(cost, 2.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AssignLabels)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN);

void BM_FitTicc(benchmark::State& state) {
  cier::ScopedWarningSink quiet([](std::string_view) {});
  const auto s = two_regimes(state.range(0));
  cier::ticc::TiccParams p;
  p.K = 2;
  p.beta = 50;
  for (auto _ : state) benchmark::DoNotOptimize(cier::ticc::fit_ticc(s, p));
}
BENCHMARK(BM_FitTicc)->Arg(100)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
