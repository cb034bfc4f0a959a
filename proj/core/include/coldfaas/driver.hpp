#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "coldfaas/clock.hpp"
#include "coldfaas/types.hpp"

namespace coldfaas {

// An executable on the local disk standing in for a unikernel image.
struct ProcessImage {
  std::filesystem::path executable_path;
  std::string checksum;  // lowercase hex digest
  std::uint64_t size_bytes = 0;

  bool operator==(const ProcessImage&) const = default;
};

struct ExecutionRequest {
  const FunctionSpec& spec;
  std::string_view payload;
  ClockReading start;     // when a worker picked the request up
  ClockReading deadline;  // same clock as start
  const ProcessImage* image = nullptr;
  int worker = 0;     // index of the executing dispatcher worker
  int in_flight = 1;  // executions running right now, this one included

  std::int64_t remaining_ns() const { return deadline - start; }
};

struct ExecutionResult {
  std::string output;
  std::int64_t startup_ns = 0;
  std::int64_t execution_ns = 0;
  Outcome outcome = Outcome::ok;
  // Latency charged to the record without being spent in real time
  // (virtual-time simulation).
  std::int64_t virtual_ns = 0;
  std::optional<bool> warm;
  std::string detail;
};

// Executor-driver contract. execute() is called concurrently from every
// dispatcher worker. Cold drivers must not leave any executor alive once
// execute() returns.
class Driver {
 public:
  virtual ~Driver() = default;

  virtual ExecutionResult execute(const ExecutionRequest& request) = 0;

  // Processes or simulated executor records currently alive.
  virtual std::size_t live_executor_count() const = 0;
};

}  // namespace coldfaas
