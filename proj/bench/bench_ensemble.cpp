// Serial reference against the OpenMP ensemble on a small Taylor-Green run.
// Thread counts above the machine's core count only measure overhead.

#include <benchmark/benchmark.h>

#include "ipdiff/ensemble.hpp"

namespace {

ipdiff::RunConfig bench_config(std::size_t particles) {
  ipdiff::RunConfig cfg;
  cfg.particles = particles;
  cfg.dt = 1e-3;
  cfg.t_final = 5.0;
  cfg.seed = 1;
  return cfg;
}

void BM_Serial(benchmark::State& state) {
  const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ipdiff::run_ensemble_serial(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 5000);
}

void BM_OpenMP(benchmark::State& state) {
  const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)));
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(ipdiff::run_ensemble(cfg, workers));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 5000);
}

}  // namespace

BENCHMARK(BM_Serial)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OpenMP)->Args({256, 1})->Args({256, 2})->Args({256, 4})->Args({256, 8})
    ->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
