#include "cier/sum_tree.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

void BM_SumTreeUpdate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  cier::replay::SumTree tree(n);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> leaf(0, n - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto _ : state) tree.update(leaf(rng), u(rng));
  benchmark::DoNotOptimize(tree.total());
}
BENCHMARK(BM_SumTreeUpdate)->RangeMultiplier(16)->Range(1 << 6, 1 << 20);

void BM_SumTreeFind(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  cier::replay::SumTree tree(n);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) tree.update(i, u(rng));
  for (auto _ : state) benchmark::DoNotOptimize(tree.find(u(rng) * tree.total()));
}
BENCHMARK(BM_SumTreeFind)->RangeMultiplier(16)->Range(1 << 6, 1 << 20);

}  // namespace
