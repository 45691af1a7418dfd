// Serial reference vs OpenMP kernels: landscape scan and replication fan-out.

#include <benchmark/benchmark.h>

#include "bq/experiment.hpp"
#include "bq/optimizer.hpp"

namespace {

bq::SystemParams bench_system() {
  bq::SystemParams s;
  s.lambda_i = 1.5;
  s.lambda_j = 2.5;
  return s;
}

bq::GridSpec fine_grid() { return {0.5, 15.0, 0.1}; }

void BM_LandscapeSerial(benchmark::State& state) {
  const auto sys = bench_system();
  for (auto _ : state) benchmark::DoNotOptimize(bq::scan_landscape_serial(fine_grid(), sys, {}, {}));
}

void BM_LandscapeParallel(benchmark::State& state) {
  const auto sys = bench_system();
  for (auto _ : state) benchmark::DoNotOptimize(bq::scan_landscape(fine_grid(), sys, {}, {}));
}

bq::SweepSpec bench_sweep() {
  bq::SweepSpec s;
  s.intervals = {3.0, 9.0};
  s.lambdas = {5.0, 11.0};
  s.replications = 4;
  return s;
}

bq::SimConfig bench_base() {
  bq::SimConfig c;
  c.horizon = 500.0;
  return c;
}

void BM_ReplicationsSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(bq::run_experiment_serial(bench_base(), bench_sweep()));
}

void BM_ReplicationsParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(bq::run_experiment(bench_base(), bench_sweep()));
}

}  // namespace

BENCHMARK(BM_LandscapeSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LandscapeParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicationsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicationsParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
