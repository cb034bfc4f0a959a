#include <benchmark/benchmark.h>

#include "coldfaas/loadgen.hpp"
#include "coldfaas/profiles.hpp"
#include "coldfaas/simulated_driver.hpp"

using namespace coldfaas;

static void BM_SampleStartup(benchmark::State& state) {
  auto profile = default_profiles().at("fn-includeos-cold");
  auto rng = make_stream(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sample_startup_ms(profile, 30, rng));
}
BENCHMARK(BM_SampleStartup);

static void BM_StandardNormal(benchmark::State& state) {
  auto rng = make_stream(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(LogNormalFit::standard_normal(rng));
}
BENCHMARK(BM_StandardNormal);

static void BM_VirtualBench(benchmark::State& state) {
  VirtualBenchConfig config;
  config.profile = default_profiles().at("kata");
  config.total_requests = 10000;
  config.parallelism = static_cast<int>(state.range(0));
  config.workers = 20;
  for (auto _ : state) benchmark::DoNotOptimize(run_virtual_bench(config));
  state.SetItemsProcessed(state.iterations() * config.total_requests);
}
BENCHMARK(BM_VirtualBench)->Arg(1)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
