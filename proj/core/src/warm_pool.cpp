#include "coldfaas/warm_pool.hpp"

#include <algorithm>

namespace coldfaas {

WarmPoolDriver::WarmPoolDriver(WarmPoolConfig config, Driver& inner) : config_(std::move(config)), inner_(inner) {}

WarmPoolDriver::~WarmPoolDriver() { stop_reaper(); }

void WarmPoolDriver::charge_idle(WarmExecutor& executor, ClockReading until) {
  std::int64_t idle_ns = std::max<std::int64_t>(0, until - executor.last_used);
  double seconds = ns_to_seconds(idle_ns);
  ledger_.idle_executor_seconds += seconds;
  ledger_.reserved_memory_mb_seconds += seconds * static_cast<double>(executor.memory_mb);
}

ExecutionResult WarmPoolDriver::execute(const ExecutionRequest& request) {
  const ClockReading now = request.start;
  std::optional<std::uint64_t> executor_id;
  bool warm = false;
  {
    std::lock_guard lock(mu_);
    for (auto& e : executors_) {
      if (e.function == request.spec.name && e.state == ExecutorState::idle_paused) {
        charge_idle(e, now);
        e.state = ExecutorState::executing;
        executor_id = e.executor_id;
        warm = true;
        break;
      }
    }
    if (!executor_id) {
      WarmExecutor e;
      e.executor_id = next_id_++;
      e.function = request.spec.name;
      e.state = ExecutorState::starting;
      e.last_used = now;
      e.idle_deadline = now;
      e.memory_mb = request.spec.memory_mb;
      executor_id = e.executor_id;
      executors_.push_back(std::move(e));
    }
  }

  FunctionSpec inner_spec = request.spec;
  if (config_.inner_profile) {
    inner_spec.driver = DriverKind::simulated;
    inner_spec.profile_name = config_.inner_profile;
  } else {
    inner_spec.driver = DriverKind::process;
  }

  const ClockReading real_start = SteadyClock::read();
  ExecutionResult result;
  if (warm) {
    // Resuming a paused executor costs resume_ms; the function body still
    // has to run to produce this request's output.
    const std::int64_t resume_ns = ms_to_ns(config_.resume_ms);
    std::int64_t virtual_ns = 0;
    if (config_.mode == SimulationMode::realtime) {
      std::this_thread::sleep_for(std::chrono::nanoseconds(resume_ns));
    } else {
      virtual_ns = resume_ns;
    }
    if (config_.inner_profile) {
      result.output.assign(request.payload);
    } else {
      ExecutionRequest inner_request{inner_spec, request.payload, request.start + resume_ns, request.deadline,
                                     request.image, request.worker, request.in_flight};
      result = inner_.execute(inner_request);
      result.execution_ns = result.startup_ns + result.execution_ns;
      virtual_ns += result.virtual_ns;
    }
    result.startup_ns = resume_ns;
    result.virtual_ns = virtual_ns;
  } else {
    ExecutionRequest inner_request{inner_spec, request.payload, request.start, request.deadline,
                                   request.image, request.worker, request.in_flight};
    result = inner_.execute(inner_request);
  }
  result.warm = warm;
  // A fully simulated executor in virtual time takes no real time at all.
  const bool fully_virtual = config_.inner_profile && config_.mode == SimulationMode::virtual_time;
  const std::int64_t elapsed = (fully_virtual ? 0 : SteadyClock::read() - real_start) + result.virtual_ns;
  const ClockReading finished = now + elapsed;

  std::lock_guard lock(mu_);
  auto it = std::find_if(executors_.begin(), executors_.end(),
                         [&](const WarmExecutor& e) { return e.executor_id == *executor_id; });
  if (result.outcome != Outcome::ok) {
    executors_.erase(it);
  } else {
    if (warm) {
      ++ledger_.warm_hits;
    } else {
      ++ledger_.cold_starts;
    }
    it->state = ExecutorState::idle_paused;
    it->last_used = finished;
    it->idle_deadline = finished + config_.idle_timeout.count();
  }
  reaper_cv_.notify_all();
  return result;
}

std::size_t WarmPoolDriver::reap_idle(ClockReading now) {
  std::lock_guard lock(mu_);
  std::size_t count = 0;
  auto removed = std::remove_if(executors_.begin(), executors_.end(), [&](WarmExecutor& e) {
    if (e.state != ExecutorState::idle_paused || e.idle_deadline > now) return false;
    charge_idle(e, now);
    ++ledger_.reaped;
    ++count;
    return true;
  });
  executors_.erase(removed, executors_.end());
  return count;
}

std::size_t WarmPoolDriver::live_executor_count() const {
  std::lock_guard lock(mu_);
  return executors_.size();
}

WasteLedger WarmPoolDriver::ledger() const {
  std::lock_guard lock(mu_);
  return ledger_;
}

std::vector<WarmExecutor> WarmPoolDriver::executors() const {
  std::lock_guard lock(mu_);
  return executors_;
}

void WarmPoolDriver::start_reaper(const Clock& clock) {
  stop_reaper();
  {
    std::lock_guard lock(mu_);
    stopping_ = false;
  }
  reaper_ = std::thread([this, &clock] {
    std::unique_lock lock(mu_);
    while (!stopping_) {
      std::optional<ClockReading> next;
      for (const auto& e : executors_) {
        if (e.state == ExecutorState::idle_paused && (!next || e.idle_deadline < *next)) next = e.idle_deadline;
      }
      // Re-check at least every 10 ms so manually driven clocks are noticed.
      auto wait = std::chrono::milliseconds(10);
      if (next) {
        std::int64_t until = *next - clock.now();
        if (until <= 0) {
          lock.unlock();
          reap_idle(clock.now());
          lock.lock();
          continue;
        }
        wait = std::min(wait, std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::nanoseconds(until)) +
                                  std::chrono::milliseconds(1));
      }
      reaper_cv_.wait_for(lock, wait);
    }
  });
}

void WarmPoolDriver::stop_reaper() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  reaper_cv_.notify_all();
  if (reaper_.joinable()) reaper_.join();
}

}  // namespace coldfaas
