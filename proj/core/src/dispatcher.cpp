#include "coldfaas/dispatcher.hpp"

#include <algorithm>

#include "coldfaas/error.hpp"

namespace coldfaas {

Driver* DriverSet::for_kind(DriverKind kind) const {
  switch (kind) {
    case DriverKind::process: return process;
    case DriverKind::simulated: return simulated;
    case DriverKind::warmpool: return warmpool;
  }
  return nullptr;
}

struct Dispatcher::Job {
  std::string function;
  std::string_view payload;
  bool noop = false;
  ClockReading arrival;
  std::string request_id;
  std::uint64_t enqueue_seq = 0;

  std::mutex mu;
  std::condition_variable cv;
  std::optional<DispatchResult> result;
};

Dispatcher::Dispatcher(DispatcherConfig config, const Registry& registry, DriverSet drivers, const Clock& clock)
    : config_(config), registry_(registry), drivers_(drivers), clock_(clock) {
  if (config_.workers < 1) throw Error(ErrorCode::invalid_argument, "workers must be >= 1");
  if (config_.queue_capacity && *config_.queue_capacity < 1) {
    throw Error(ErrorCode::invalid_argument, "queue_capacity must be >= 1");
  }
  workers_.reserve(static_cast<std::size_t>(config_.workers));
  for (int i = 0; i < config_.workers; ++i) {
    workers_.emplace_back([this, i] { worker_loop(i); });
  }
}

Dispatcher::~Dispatcher() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  work_cv_.notify_all();
  for (auto& t : workers_) t.join();
}

DispatchResult Dispatcher::dispatch(std::string_view function, std::string_view payload,
                                    std::optional<ClockReading> arrival) {
  Job job;
  job.function.assign(function);
  job.payload = payload;
  job.arrival = arrival.value_or(clock_.now());
  return submit(job);
}

DispatchResult Dispatcher::dispatch_noop(std::optional<ClockReading> arrival) {
  Job job;
  job.function = "noop";
  job.noop = true;
  job.arrival = arrival.value_or(clock_.now());
  return submit(job);
}

DispatchResult Dispatcher::finish_immediately(InvocationRecord record, std::string detail) {
  record.total_ns = std::max<std::int64_t>(0, clock_.now() - record.arrival);
  {
    std::lock_guard lock(mu_);
    ++stats_.completed;
    ++stats_.outcomes[static_cast<std::size_t>(record.outcome)];
  }
  DispatchResult result;
  result.record = std::move(record);
  result.detail = std::move(detail);
  return result;
}

DispatchResult Dispatcher::submit(Job& job) {
  InvocationRecord early;
  early.function = job.function;
  early.arrival = job.arrival;
  {
    std::lock_guard lock(mu_);
    job.request_id = "r" + std::to_string(next_request_++);
    early.request_id = job.request_id;
    ++stats_.arrivals;
    if (!job.noop && !registry_.find(job.function)) {
      early.outcome = Outcome::not_found;
    } else if (job.payload.size() > config_.max_payload_bytes) {
      early.outcome = Outcome::payload_too_large;
    } else if (config_.queue_capacity && queue_.size() >= *config_.queue_capacity) {
      early.outcome = Outcome::rejected;
    } else {
      job.enqueue_seq = next_enqueue_++;
      queue_.push_back(&job);
      ++stats_.queued;
    }
  }
  if (job.enqueue_seq == 0) {
    std::string detail;
    switch (early.outcome) {
      case Outcome::not_found: detail = "function '" + job.function + "' not deployed"; break;
      case Outcome::payload_too_large: detail = "payload exceeds " + std::to_string(config_.max_payload_bytes) + " bytes"; break;
      default: detail = "queue full"; break;
    }
    return finish_immediately(std::move(early), std::move(detail));
  }
  work_cv_.notify_one();

  std::unique_lock lock(job.mu);
  job.cv.wait(lock, [&] { return job.result.has_value(); });
  return std::move(*job.result);
}

void Dispatcher::worker_loop(int index) {
  for (;;) {
    Job* job = nullptr;
    int in_flight = 0;
    std::uint64_t dequeue_seq = 0;
    {
      std::unique_lock lock(mu_);
      work_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      job = queue_.front();
      queue_.pop_front();
      --stats_.queued;
      ++stats_.in_flight;
      stats_.max_in_flight = std::max(stats_.max_in_flight, stats_.in_flight);
      in_flight = static_cast<int>(stats_.in_flight);
      dequeue_seq = next_dequeue_++;
    }

    DispatchResult result = run_job(*job, index, in_flight, dequeue_seq);

    {
      std::lock_guard lock(mu_);
      --stats_.in_flight;
      ++stats_.completed;
      ++stats_.outcomes[static_cast<std::size_t>(result.record.outcome)];
    }
    {
      std::lock_guard lock(job->mu);
      job->result = std::move(result);
    }
    job->cv.notify_one();
  }
}

DispatchResult Dispatcher::run_job(Job& job, int worker, int in_flight, std::uint64_t dequeue_seq) {
  DispatchResult out;
  out.enqueue_seq = job.enqueue_seq;
  out.dequeue_seq = dequeue_seq;
  InvocationRecord& record = out.record;
  record.request_id = job.request_id;
  record.function = job.function;
  record.arrival = job.arrival;

  const ClockReading dequeued = clock_.now();
  record.queue_wait_ns = std::max<std::int64_t>(0, dequeued - job.arrival);

  std::int64_t virtual_ns = 0;
  if (!job.noop) {
    try {
      RegistryEntry entry = registry_.resolve(job.function);
      std::optional<ProcessImage> image = entry.image;
      if (entry.spec.image_ref != entry.spec.name) {
        auto target = registry_.find(entry.spec.image_ref);
        image = target ? registry_.resolve(entry.spec.image_ref).image : std::nullopt;
      }
      const ClockReading deadline = job.arrival + ms_to_ns(static_cast<double>(entry.spec.timeout_ms));
      Driver* driver = drivers_.for_kind(entry.spec.driver);
      if (driver == nullptr) {
        record.outcome = Outcome::spawn_failure;
        out.detail = "no driver configured for '" + std::string(to_string(entry.spec.driver)) + "'";
      } else if (dequeued >= deadline) {
        record.outcome = Outcome::timeout;
        out.detail = "deadline passed while queued";
      } else {
        ExecutionRequest request{entry.spec, job.payload, dequeued, deadline,
                                 image ? &*image : nullptr, worker, in_flight};
        ExecutionResult result = driver->execute(request);
        record.startup_ns = result.startup_ns;
        record.execution_ns = result.execution_ns;
        record.outcome = result.outcome;
        record.warm = result.warm;
        virtual_ns = result.virtual_ns;
        out.output = std::move(result.output);
        out.detail = std::move(result.detail);
      }
    } catch (const Error& e) {
      record.outcome = e.code() == ErrorCode::not_found ? Outcome::not_found : Outcome::image_missing;
      out.detail = e.what();
    }
  }

  record.total_ns = (clock_.now() - job.arrival) + virtual_ns;
  // Manual clocks do not observe the real time a driver spends.
  record.total_ns = std::max(record.total_ns, record.queue_wait_ns + record.startup_ns + record.execution_ns);
  return out;
}

DispatcherStats Dispatcher::stats_snapshot() const {
  std::lock_guard lock(mu_);
  return stats_;
}

}  // namespace coldfaas
