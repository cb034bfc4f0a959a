#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coldfaas/clock.hpp"
#include "coldfaas/types.hpp"

namespace coldfaas {

enum class ConnectionMode { per_request, keep_alive };

std::string_view to_string(ConnectionMode mode);
std::optional<ConnectionMode> parse_connection_mode(std::string_view text);

struct BenchConfig {
  std::string target_url;
  int total_requests = 10000;
  int parallelism = 1;
  ConnectionMode connection_mode = ConnectionMode::keep_alive;
  std::string payload;
  std::uint64_t seed = 1;
  std::string method;  // empty: POST when a payload is set or the path is /invoke/..., else GET
  std::chrono::milliseconds request_timeout{60'000};
};

// Throws Error{invalid_argument}.
void validate(const BenchConfig& config);

struct SampleSet {
  std::vector<InvocationRecord> samples;
  BenchConfig config;
  std::string label;
  std::int64_t started_unix_ms = 0;
  std::int64_t finished_unix_ms = 0;
  ClockReading started;  // monotonic run span, used for throughput
  ClockReading finished;
  bool failed = false;
  std::string error;

  std::size_t ok_count() const;
};

// Lane k of P issues requests k, k+P, k+2P, ... back to back, so exactly P
// requests are outstanding until the lanes start running out of quota.
// Lane assignment and request ids depend only on the seed.
std::vector<int> lane_quotas(int total_requests, int parallelism);
std::string request_id_for(std::uint64_t seed, int index);

// Closed-loop HTTP load against a live target. Per-request transport
// failures become transport_error samples; an unreachable target at start
// throws Error{unreachable}.
SampleSet run_bench(const BenchConfig& config);

// Runs run_bench per parallelism level, pausing `cooldown` between levels.
// A failing level yields a SampleSet with failed = true.
std::vector<SampleSet> sweep(const std::vector<int>& levels, const BenchConfig& base,
                             std::chrono::milliseconds cooldown = std::chrono::seconds(2));

struct VirtualBenchConfig {
  RuntimeProfile profile;
  int total_requests = 10000;
  int parallelism = 1;
  int workers = 20;
  std::uint64_t seed = 1;
  double execution_ms = 0.0;
  std::string function = "simulated";
};

// The same closed loop, dispatcher queue and simulated driver, replayed as a
// discrete-event simulation in virtual time. Fully deterministic per seed.
SampleSet run_virtual_bench(const VirtualBenchConfig& config);

// JSON lines, one InvocationRecord per line. Run metadata goes to a sidecar
// `<path>.meta.json`.
void write_samples(const SampleSet& samples, const std::filesystem::path& path);
SampleSet read_samples(const std::filesystem::path& path);
std::filesystem::path meta_path_for(const std::filesystem::path& samples_path);

}  // namespace coldfaas
