#include "cier/tscf.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

Eigen::MatrixXd noise(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  return Eigen::MatrixXd::NullaryExpr(rows, cols, [&] { return g(rng); });
}

void BM_Dtw(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd a = noise(state.range(0), 2, rng);
  const Eigen::MatrixXd b = noise(state.range(0), 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(cier::tscf::dtw(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Dtw)->RangeMultiplier(2)->Range(8, 256)->Complexity(benchmark::oNSquared);

void BM_DtwBanded(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd a = noise(state.range(0), 2, rng);
  const Eigen::MatrixXd b = noise(state.range(0), 2, rng);
  cier::tscf::DtwOptions opt;
  opt.radius = 8;
  for (auto _ : state) benchmark::DoNotOptimize(cier::tscf::dtw(a, b, opt));
}
BENCHMARK(BM_DtwBanded)->RangeMultiplier(2)->Range(8, 256);

void BM_ClusterFactors(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::vector<cier::series::Subsequence> segs;
  for (int i = 0; i < state.range(0); ++i) {
    cier::series::Subsequence s;
    s.episode_id = i;
    s.values = noise(10, 1, rng);
    s.end = 9;
    segs.push_back(std::move(s));
  }
  for (auto _ : state) benchmark::DoNotOptimize(cier::tscf::cluster_factors(segs, 5, 1));
}
BENCHMARK(BM_ClusterFactors)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
