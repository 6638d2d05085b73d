#include <benchmark/benchmark.h>

#include "avgkit/bell.hpp"

using namespace avgkit;

static void BM_BellTerms(benchmark::State& state) {
  const int p = (int)state.range(0);
  for (auto _ : state) {
    for (int q = 1; q <= p; ++q) benchmark::DoNotOptimize(bell_terms(p, q).size());
  }
}
BENCHMARK(BM_BellTerms)->DenseRange(4, 12, 4);

static void BM_BellApply(benchmark::State& state) {
  const int p = (int)state.range(0);
  SymTensor prod(1, 2);
  const int idx[2] = {0, 0};
  prod.set_entry(0, idx, 1.0);
  std::vector<Vec> factors(p - 1, Vec{1.3});
  for (auto _ : state) benchmark::DoNotOptimize(bell_apply(p, 2, factors, prod));
}
BENCHMARK(BM_BellApply)->DenseRange(4, 10, 2);

BENCHMARK_MAIN();
