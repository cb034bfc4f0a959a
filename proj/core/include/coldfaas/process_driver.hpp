#pragma once

#include <atomic>
#include <chrono>

#include "coldfaas/driver.hpp"

namespace coldfaas {

struct ProcessDriverConfig {
  // SIGTERM on timeout, SIGKILL after this grace.
  std::chrono::milliseconds kill_grace{50};
};

// Spawns one child per request. The payload goes to the child's stdin
// followed by EOF; everything the child writes to stdout until exit is the
// output. Exit code 0 is ok, anything else function_error.
//
// startup = spawn until the first stdout byte (or until exit when nothing is
// written), execution = the remainder until exit. The child runs in its own
// process group, which is killed before returning so no descendant survives.
class ProcessDriver final : public Driver {
 public:
  explicit ProcessDriver(ProcessDriverConfig config = {}) : config_(config) {}

  ExecutionResult execute(const ExecutionRequest& request) override;

  ExecutionResult run(const ProcessImage& image, std::string_view payload,
                      std::chrono::nanoseconds timeout);

  std::size_t live_executor_count() const override { return live_.load(std::memory_order_acquire); }

 private:
  ProcessDriverConfig config_;
  std::atomic<std::size_t> live_{0};
};

}  // namespace coldfaas
