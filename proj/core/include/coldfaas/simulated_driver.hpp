#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <vector>

#include "coldfaas/driver.hpp"
#include "coldfaas/profiles.hpp"

namespace coldfaas {

enum class SimulationMode { realtime, virtual_time };

// z such that Phi(z) = 0.99.
inline constexpr double kStandardNormalQ99 = 2.3263478740408408;

// Log-normal fitted to a median and a 99th percentile:
// mu = ln(median), sigma = (ln(p99) - ln(median)) / z_0.99.
class LogNormalFit {
 public:
  LogNormalFit(double median, double p99);

  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  double quantile(double z) const;  // value at standard-normal score z

  template <class Rng>
  double sample(Rng& rng) const {
    return quantile(standard_normal(rng));
  }

  // Box-Muller over 53-bit uniforms; portable across standard libraries,
  // unlike std::normal_distribution.
  template <class Rng>
  static double standard_normal(Rng& rng) {
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    double u1 = (static_cast<double>(rng() >> 11) + 1.0) * kScale;  // (0, 1]
    double u2 = static_cast<double>(rng() >> 11) * kScale;          // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  double mu_;
  double sigma_;
};

// max(1, in_flight / cores) ^ contention_exponent
double contention_factor(const RuntimeProfile& profile, int in_flight);

// One draw of the startup latency, in ms, including fixed overhead and
// contention inflation.
double sample_startup_ms(const RuntimeProfile& profile, int in_flight, std::mt19937_64& rng);

// Seeds are derived from (run seed, stream index) so each worker owns an
// independent, reproducible stream.
std::mt19937_64 make_stream(std::uint64_t run_seed, std::uint64_t stream_index);

struct SimulatedDriverConfig {
  SimulationMode mode = SimulationMode::realtime;
  std::uint64_t seed = 1;
  int streams = 20;  // one per dispatcher worker
  double execution_ms = 0.0;
};

// Stands in for a virtualization technology by sampling its startup latency
// from a RuntimeProfile. Output echoes the payload.
class SimulatedDriver final : public Driver {
 public:
  SimulatedDriver(ProfileTable profiles, SimulatedDriverConfig config = {});

  ExecutionResult execute(const ExecutionRequest& request) override;

  // Samples a startup for an explicit profile; blocks in realtime mode.
  ExecutionResult simulate(const RuntimeProfile& profile, int in_flight, int stream,
                           std::int64_t timeout_ns, std::string_view payload = {});

  std::size_t live_executor_count() const override { return live_.load(std::memory_order_acquire); }

  const ProfileTable& profiles() const { return profiles_; }
  SimulationMode mode() const { return config_.mode; }

 private:
  struct Stream {
    std::mutex mu;
    std::mt19937_64 rng;
  };

  double draw_ms(const RuntimeProfile& profile, int in_flight, int stream);

  ProfileTable profiles_;
  SimulatedDriverConfig config_;
  std::vector<std::unique_ptr<Stream>> streams_;
  std::atomic<std::size_t> live_{0};
};

}  // namespace coldfaas
