#include <benchmark/benchmark.h>

#include <numbers>

#include "avgkit/melnikov.hpp"
#include "avgkit/strobo.hpp"

using namespace avgkit;

namespace {

System bench_system() {
  const int n = 1;
  return make_system(
      n, 2.0 * std::numbers::pi, 3,
      {{parse_expr("-0.5*x1 + 2*sin(t)*x1^2", n)},
       {parse_expr("cos(t)*x1 + 0.25", n)},
       {parse_expr("x1^2", n)}});
}

IntegratorConfig cfg(int steps) {
  IntegratorConfig c;
  c.steps_per_period = steps;
  c.period = 2.0 * std::numbers::pi;
  return c;
}

}  // namespace

static void BM_AveragedF(benchmark::State& state) {
  const System sys = bench_system();
  const MelnikovEvaluator mel(sys, cfg((int)state.range(0)));
  const Vec z = {0.4};
  for (auto _ : state) benchmark::DoNotOptimize(mel.averaged_f(z));
}
BENCHMARK(BM_AveragedF)->Arg(512)->Arg(2048)->Arg(8192);

static void BM_StroboG(benchmark::State& state) {
  const System sys = bench_system();
  const Vec z = {0.4};
  for (auto _ : state) {
    // fresh engine per iteration so the memo cache does not hide the cost
    StroboEngine engine(sys, cfg(1024));
    benchmark::DoNotOptimize(engine.strobo_g(z, (int)state.range(0)));
  }
}
BENCHMARK(BM_StroboG)->Arg(2)->Arg(3);
