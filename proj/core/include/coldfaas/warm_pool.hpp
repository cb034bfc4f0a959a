#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "coldfaas/clock.hpp"
#include "coldfaas/driver.hpp"
#include "coldfaas/simulated_driver.hpp"

namespace coldfaas {

struct WasteLedger {
  double idle_executor_seconds = 0.0;
  double reserved_memory_mb_seconds = 0.0;
  std::uint64_t cold_starts = 0;
  std::uint64_t warm_hits = 0;
  std::uint64_t reaped = 0;

  bool operator==(const WasteLedger&) const = default;
};

enum class ExecutorState { starting, idle_paused, executing };

struct WarmExecutor {
  std::uint64_t executor_id = 0;
  std::string function;
  ExecutorState state = ExecutorState::starting;
  ClockReading last_used;
  ClockReading idle_deadline;
  std::int64_t memory_mb = 0;
};

struct WarmPoolConfig {
  std::chrono::nanoseconds idle_timeout = std::chrono::seconds(30);
  double resume_ms = 13.6;
  // Cold starts sample this simulated profile instead of spawning the
  // function's process image.
  std::optional<std::string> inner_profile;
  SimulationMode mode = SimulationMode::realtime;  // how resume latency is charged
};

// Baseline that keeps executors paused after use, the way a conventional
// FaaS platform does, and accounts the idle time they reserve. Each
// executor serves one invocation at a time.
class WarmPoolDriver final : public Driver {
 public:
  // `inner` performs cold starts: a ProcessDriver, or a SimulatedDriver when
  // config.inner_profile is set.
  WarmPoolDriver(WarmPoolConfig config, Driver& inner);
  ~WarmPoolDriver() override;

  WarmPoolDriver(const WarmPoolDriver&) = delete;
  WarmPoolDriver& operator=(const WarmPoolDriver&) = delete;

  ExecutionResult execute(const ExecutionRequest& request) override;

  // Destroys every idle executor whose deadline is <= now and charges its
  // idle interval [last_used, now] to the ledger.
  std::size_t reap_idle(ClockReading now);

  std::size_t live_executor_count() const override;
  WasteLedger ledger() const;
  std::vector<WarmExecutor> executors() const;
  const WarmPoolConfig& config() const { return config_; }

  // Background reaper waking at the earliest idle deadline.
  void start_reaper(const Clock& clock);
  void stop_reaper();

 private:
  void charge_idle(WarmExecutor& executor, ClockReading until);

  WarmPoolConfig config_;
  Driver& inner_;

  mutable std::mutex mu_;
  std::condition_variable reaper_cv_;
  std::vector<WarmExecutor> executors_;
  WasteLedger ledger_;
  std::uint64_t next_id_ = 1;

  std::thread reaper_;
  bool stopping_ = false;
};

}  // namespace coldfaas
