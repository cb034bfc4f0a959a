#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "coldfaas/clock.hpp"

namespace coldfaas {

inline constexpr std::int64_t kDefaultTimeoutMs = 30'000;
inline constexpr std::int64_t kDefaultMemoryMb = 128;
inline constexpr std::size_t kDefaultMaxPayloadBytes = 1 << 20;

enum class DriverKind { process, simulated, warmpool };

std::string_view to_string(DriverKind kind);
std::optional<DriverKind> parse_driver_kind(std::string_view text);

struct FunctionSpec {
  std::string name;
  DriverKind driver = DriverKind::process;
  std::string image_ref;  // registry key of the image; defaults to name
  std::int64_t timeout_ms = kDefaultTimeoutMs;
  std::optional<std::string> profile_name;  // iff driver == simulated
  std::int64_t memory_mb = kDefaultMemoryMb;

  bool operator==(const FunctionSpec&) const = default;
};

bool is_valid_function_name(std::string_view name);

// Throws Error{invalid_spec} naming the first violated invariant.
void validate(const FunctionSpec& spec);

// Every request ends in exactly one of these. The first four are the
// platform-level outcomes; the rest are the error paths that still produce a
// record (lookup failures, spawn errors, oversized payloads, loadgen
// transport failures).
enum class Outcome {
  ok,
  function_error,
  timeout,
  rejected,
  not_found,
  image_missing,
  spawn_failure,
  payload_too_large,
  transport_error,
};

inline constexpr int kOutcomeCount = 9;

std::string_view to_string(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view text);

struct InvocationRecord {
  std::string request_id;
  std::string function;
  ClockReading arrival;
  std::int64_t queue_wait_ns = 0;
  std::int64_t startup_ns = 0;
  std::int64_t execution_ns = 0;
  std::int64_t total_ns = 0;
  std::optional<std::int64_t> connection_setup_ns;
  Outcome outcome = Outcome::ok;
  std::optional<bool> warm;  // set only by the warm-pool driver
  int lane = 0;              // loadgen lane that issued the request

  // total >= queue_wait + startup + execution
  bool timing_consistent() const {
    return total_ns >= queue_wait_ns + startup_ns + execution_ns;
  }

  bool operator==(const InvocationRecord&) const = default;
};

// Parametric startup-latency model of one virtualization technology.
struct RuntimeProfile {
  std::string name;
  double median_ms = 1.0;
  double p99_ms = 1.0;
  int cores = 24;
  double contention_exponent = 1.0;
  double fixed_overhead_ms = 0.0;
  std::string source;  // provenance of the numbers

  bool operator==(const RuntimeProfile&) const = default;
};

// Throws Error{invalid_profile}.
void validate(const RuntimeProfile& profile);

}  // namespace coldfaas
