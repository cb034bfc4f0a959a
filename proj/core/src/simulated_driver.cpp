#include "coldfaas/simulated_driver.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include "coldfaas/error.hpp"

namespace coldfaas {

LogNormalFit::LogNormalFit(double median, double p99) {
  if (!(median > 0.0) || !(p99 >= median)) {
    throw Error(ErrorCode::invalid_profile, "log-normal fit needs 0 < median <= p99");
  }
  mu_ = std::log(median);
  sigma_ = (std::log(p99) - mu_) / kStandardNormalQ99;
}

double LogNormalFit::quantile(double z) const { return std::exp(mu_ + sigma_ * z); }

double contention_factor(const RuntimeProfile& profile, int in_flight) {
  double load = static_cast<double>(in_flight) / static_cast<double>(profile.cores);
  return std::pow(std::max(1.0, load), profile.contention_exponent);
}

double sample_startup_ms(const RuntimeProfile& profile, int in_flight, std::mt19937_64& rng) {
  LogNormalFit fit(profile.median_ms, profile.p99_ms);
  double base = fit.sample(rng);
  return (base + profile.fixed_overhead_ms) * contention_factor(profile, std::max(1, in_flight));
}

std::mt19937_64 make_stream(std::uint64_t run_seed, std::uint64_t stream_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(run_seed), static_cast<std::uint32_t>(run_seed >> 32),
                    static_cast<std::uint32_t>(stream_index), static_cast<std::uint32_t>(stream_index >> 32)};
  return std::mt19937_64(seq);
}

SimulatedDriver::SimulatedDriver(ProfileTable profiles, SimulatedDriverConfig config)
    : profiles_(std::move(profiles)), config_(config) {
  int n = std::max(1, config_.streams);
  streams_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto stream = std::make_unique<Stream>();
    stream->rng = make_stream(config_.seed, static_cast<std::uint64_t>(i));
    streams_.push_back(std::move(stream));
  }
}

double SimulatedDriver::draw_ms(const RuntimeProfile& profile, int in_flight, int stream) {
  auto& s = *streams_[static_cast<std::size_t>(stream) % streams_.size()];
  std::lock_guard lock(s.mu);
  return sample_startup_ms(profile, in_flight, s.rng);
}

ExecutionResult SimulatedDriver::execute(const ExecutionRequest& request) {
  const auto* profile = request.spec.profile_name ? profiles_.find(*request.spec.profile_name) : nullptr;
  if (profile == nullptr) {
    ExecutionResult result;
    result.outcome = Outcome::image_missing;
    result.detail = "unknown runtime profile '" + request.spec.profile_name.value_or("") + "'";
    return result;
  }
  return simulate(*profile, request.in_flight, request.worker, request.remaining_ns(), request.payload);
}

ExecutionResult SimulatedDriver::simulate(const RuntimeProfile& profile, int in_flight, int stream,
                                          std::int64_t timeout_ns, std::string_view payload) {
  ExecutionResult result;
  const std::int64_t startup_ns = std::max<std::int64_t>(1, ms_to_ns(draw_ms(profile, in_flight, stream)));
  const std::int64_t execution_ns = ms_to_ns(config_.execution_ms);
  const std::int64_t needed = startup_ns + execution_ns;
  const bool timed_out = needed > timeout_ns;
  const std::int64_t spent = timed_out ? std::max<std::int64_t>(0, timeout_ns) : needed;

  if (config_.mode == SimulationMode::realtime) {
    live_.fetch_add(1, std::memory_order_acq_rel);
    std::this_thread::sleep_for(std::chrono::nanoseconds(spent));
    live_.fetch_sub(1, std::memory_order_acq_rel);
  } else {
    result.virtual_ns = spent;
  }

  if (timed_out) {
    result.outcome = Outcome::timeout;
    result.startup_ns = std::min(startup_ns, spent);
    result.execution_ns = spent - result.startup_ns;
    result.detail = "deadline exceeded";
    return result;
  }
  result.startup_ns = startup_ns;
  result.execution_ns = execution_ns;
  result.output.assign(payload);
  return result;
}

}  // namespace coldfaas
