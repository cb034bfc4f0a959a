#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>

#include "coldfaas/platform.hpp"
#include "coldfaas/process_driver.hpp"
#include "coldfaas/registry.hpp"

using namespace coldfaas;
namespace fs = std::filesystem;

static ProcessImage echo_image() {
  fs::path path = fs::path(COLDFAAS_BENCH_FUNCTIONS_DIR) / "echo";
  return {path, sha256_file_hex(path), fs::file_size(path)};
}

// One cold process per iteration: spawn, pipe the payload, reap.
static void BM_ProcessSpawnEcho(benchmark::State& state) {
  ProcessDriver driver;
  auto image = echo_image();
  std::string payload(static_cast<std::size_t>(state.range(0)), 'x');
  std::int64_t startup = 0;
  for (auto _ : state) {
    auto r = driver.run(image, payload, std::chrono::seconds(10));
    if (r.outcome != Outcome::ok) state.SkipWithError("echo failed");
    startup += r.startup_ns;
  }
  state.counters["startup_us"] = benchmark::Counter(static_cast<double>(startup) / 1e3 / static_cast<double>(state.iterations()));
}
BENCHMARK(BM_ProcessSpawnEcho)->Arg(0)->Arg(64 << 10)->Unit(benchmark::kMicrosecond);

static void BM_DispatchNoop(benchmark::State& state) {
  fs::path dir = fs::temp_directory_path() / "coldfaas-bench-registry";
  PlatformConfig config;
  config.registry_dir = dir;
  config.dispatcher.workers = 20;
  config.run_reaper = false;
  Platform platform(std::move(config));
  for (auto _ : state) benchmark::DoNotOptimize(platform.dispatcher().dispatch_noop());
  std::error_code ec;
  fs::remove_all(dir, ec);
}
BENCHMARK(BM_DispatchNoop)->Unit(benchmark::kMicrosecond);

static void BM_RegistryResolve(benchmark::State& state) {
  fs::path dir = fs::temp_directory_path() / "coldfaas-bench-resolve";
  fs::remove_all(dir);
  Registry registry(dir);
  FunctionSpec spec;
  spec.name = "echo";
  auto image = echo_image();
  std::string bytes(image.size_bytes, '\0');
  {
    std::ifstream in(image.executable_path, std::ios::binary);
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  registry.put(spec, bytes);
  for (auto _ : state) benchmark::DoNotOptimize(registry.resolve("echo"));
  fs::remove_all(dir);
}
BENCHMARK(BM_RegistryResolve)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
