#pragma once

#include <array>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "coldfaas/clock.hpp"
#include "coldfaas/driver.hpp"
#include "coldfaas/registry.hpp"
#include "coldfaas/types.hpp"

namespace coldfaas {

struct DispatcherConfig {
  int workers = 20;
  std::optional<std::size_t> queue_capacity;  // unbounded when empty
  std::int64_t default_timeout_ms = kDefaultTimeoutMs;
  std::size_t max_payload_bytes = kDefaultMaxPayloadBytes;
};

struct DriverSet {
  Driver* process = nullptr;
  Driver* simulated = nullptr;
  Driver* warmpool = nullptr;

  Driver* for_kind(DriverKind kind) const;
};

struct DispatchResult {
  InvocationRecord record;
  std::string output;
  std::string detail;
  std::uint64_t enqueue_seq = 0;  // 0 when the request never entered the queue
  std::uint64_t dequeue_seq = 0;
};

struct DispatcherStats {
  std::uint64_t arrivals = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t queued = 0;
  std::uint64_t completed = 0;
  std::uint64_t max_in_flight = 0;
  std::array<std::uint64_t, kOutcomeCount> outcomes{};

  std::uint64_t count(Outcome o) const { return outcomes[static_cast<std::size_t>(o)]; }
};

// Fixed pool of workers draining a FIFO queue. dispatch() blocks the caller
// until its record is final; at most `workers` executions run at once.
class Dispatcher {
 public:
  Dispatcher(DispatcherConfig config, const Registry& registry, DriverSet drivers,
             const Clock& clock = SteadyClock::instance());
  ~Dispatcher();

  Dispatcher(const Dispatcher&) = delete;
  Dispatcher& operator=(const Dispatcher&) = delete;

  // Queue wait is measured from `arrival` (defaults to now).
  DispatchResult dispatch(std::string_view function, std::string_view payload,
                          std::optional<ClockReading> arrival = std::nullopt);

  // Goes through the queue and a worker but runs no driver.
  DispatchResult dispatch_noop(std::optional<ClockReading> arrival = std::nullopt);

  DispatcherStats stats_snapshot() const;

  const DispatcherConfig& config() const { return config_; }
  const Clock& clock() const { return clock_; }

 private:
  struct Job;

  DispatchResult submit(Job& job);
  DispatchResult finish_immediately(InvocationRecord record, std::string detail);
  void worker_loop(int index);
  DispatchResult run_job(Job& job, int worker, int in_flight, std::uint64_t dequeue_seq);

  DispatcherConfig config_;
  const Registry& registry_;
  DriverSet drivers_;
  const Clock& clock_;

  mutable std::mutex mu_;
  std::condition_variable work_cv_;
  std::deque<Job*> queue_;
  DispatcherStats stats_;
  std::uint64_t next_request_ = 1;
  std::uint64_t next_enqueue_ = 1;
  std::uint64_t next_dequeue_ = 1;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

}  // namespace coldfaas
