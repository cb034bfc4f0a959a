#pragma once

#include <atomic>
#include <chrono>
#include <compare>
#include <cstdint>

namespace coldfaas {

// Monotonic nanoseconds since an arbitrary process-local epoch.
struct ClockReading {
  std::int64_t ns = 0;

  constexpr auto operator<=>(const ClockReading&) const = default;

  constexpr ClockReading operator+(std::int64_t delta_ns) const { return {ns + delta_ns}; }
  constexpr std::int64_t operator-(ClockReading other) const { return ns - other.ns; }

  static constexpr ClockReading from_ms(double ms) {
    return {static_cast<std::int64_t>(ms * 1'000'000.0)};
  }
};

constexpr std::int64_t ms_to_ns(double ms) { return static_cast<std::int64_t>(ms * 1'000'000.0); }
constexpr double ns_to_ms(std::int64_t ns) { return static_cast<double>(ns) / 1'000'000.0; }
constexpr double ns_to_seconds(std::int64_t ns) { return static_cast<double>(ns) / 1e9; }

class Clock {
 public:
  virtual ~Clock() = default;
  virtual ClockReading now() const = 0;
};

// CLOCK_MONOTONIC via std::chrono::steady_clock.
class SteadyClock final : public Clock {
 public:
  ClockReading now() const override { return read(); }

  static ClockReading read() {
    auto since_epoch = std::chrono::steady_clock::now().time_since_epoch();
    return {std::chrono::duration_cast<std::chrono::nanoseconds>(since_epoch).count()};
  }

  static SteadyClock& instance() {
    static SteadyClock clock;
    return clock;
  }
};

// Hand-driven clock for deterministic tests and virtual-time runs.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(ClockReading start = {}) : ns_(start.ns) {}

  ClockReading now() const override { return {ns_.load(std::memory_order_acquire)}; }

  void advance(std::int64_t delta_ns) {
    if (delta_ns > 0) ns_.fetch_add(delta_ns, std::memory_order_acq_rel);
  }

  // Never moves backwards.
  void set(ClockReading t) {
    auto cur = ns_.load(std::memory_order_acquire);
    while (t.ns > cur && !ns_.compare_exchange_weak(cur, t.ns, std::memory_order_acq_rel)) {
    }
  }

 private:
  std::atomic<std::int64_t> ns_;
};

}  // namespace coldfaas
