#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "coldfaas/error.hpp"
#include "coldfaas/profiles.hpp"
#include "coldfaas/simulated_driver.hpp"
#include "test_support.hpp"

using namespace coldfaas;

namespace {

// Sorted copy; q in (0, 1], nearest rank.
double sorted_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::max<std::size_t>(rank, 1) - 1];
}

std::vector<double> draw(const RuntimeProfile& p, int in_flight, int n, std::uint64_t seed) {
  auto rng = make_stream(seed, 0);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(sample_startup_ms(p, in_flight, rng));
  return out;
}

RuntimeProfile no_contention(RuntimeProfile p) {
  p.contention_exponent = 0.0;
  return p;
}

}  // namespace

TEST(LogNormalFit, Parameters) {
  LogNormalFit fit(2200.0, 3300.0);
  EXPECT_DOUBLE_EQ(fit.mu(), std::log(2200.0));
  EXPECT_NEAR(fit.sigma(), std::log(1.5) / 2.3263478740408408, 1e-15);
  EXPECT_NEAR(fit.quantile(0.0), 2200.0, 1e-9);
  EXPECT_NEAR(fit.quantile(kStandardNormalQ99), 3300.0, 1e-9);
  EXPECT_THROW(LogNormalFit(0.0, 1.0), Error);
  EXPECT_THROW(LogNormalFit(2.0, 1.0), Error);
}

TEST(LogNormalFit, StandardNormalMoments) {
  auto rng = make_stream(3, 0);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double z = LogNormalFit::standard_normal(rng);
    ASSERT_TRUE(std::isfinite(z));
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(LogNormalFit, EmpiricalQuantilesForEveryShippedProfile) {
  for (const auto& profile : default_profiles().list()) {
    auto p = no_contention(profile);
    p.fixed_overhead_ms = 0.0;
    auto v = draw(p, 1, 100000, 11);
    double median = sorted_quantile(v, 0.5), p99 = sorted_quantile(v, 0.99);
    EXPECT_LE(std::abs(median - p.median_ms) / p.median_ms, 0.02) << p.name << " median " << median;
    EXPECT_LE(std::abs(p99 - p.p99_ms) / p.p99_ms, 0.10) << p.name << " p99 " << p99;
  }
}

TEST(SimulatedSampling, TableMediansAtSingleInFlight) {
  auto table = default_profiles();
  for (auto name : {"fn-includeos-cold", "fn-docker-cold", "lambda-cold", "lambda-warm"}) {
    auto v = draw(table.at(name), 1, 10000, 5);
    double median = sorted_quantile(v, 0.5);
    EXPECT_NEAR(median, table.at(name).median_ms, 0.05 * table.at(name).median_ms) << name;
  }
}

TEST(SimulatedSampling, IncludeosBandAtModerateLoad) {
  auto p = default_profiles().at("includeos-hvt");
  auto median = sorted_quantile(draw(p, 10, 10000, 9), 0.5);
  EXPECT_GE(median, 8.0);
  EXPECT_LE(median, 15.0);
}

TEST(SimulatedSampling, KataAtCoresInFlight) {
  auto p = default_profiles().at("kata");
  auto v = draw(p, p.cores, 10000, 13);
  EXPECT_NEAR(sorted_quantile(v, 0.5), 2200.0, 0.05 * 2200.0);
  EXPECT_NEAR(sorted_quantile(v, 0.99), 3300.0, 0.10 * 3300.0);
}

TEST(SimulatedSampling, ContentionExponentZeroIsIdentity) {
  RuntimeProfile p{"flat", 10.0, 20.0, 24, 0.0};
  EXPECT_DOUBLE_EQ(contention_factor(p, 1), 1.0);
  EXPECT_DOUBLE_EQ(contention_factor(p, 400), 1.0);
  auto a = draw(p, 1, 1000, 21);
  auto b = draw(p, 400, 1000, 21);
  EXPECT_EQ(a, b);
}

TEST(SimulatedSampling, ContentionFactor) {
  RuntimeProfile p{"c", 10.0, 20.0, 24, 1.0};
  EXPECT_DOUBLE_EQ(contention_factor(p, 10), 1.0);
  EXPECT_DOUBLE_EQ(contention_factor(p, 24), 1.0);
  EXPECT_DOUBLE_EQ(contention_factor(p, 48), 2.0);
  p.contention_exponent = 2.0;
  EXPECT_DOUBLE_EQ(contention_factor(p, 48), 4.0);
  auto a = draw(p, 24, 100, 4);
  auto b = draw(p, 48, 100, 4);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], 4.0 * a[i], 1e-9 * b[i]);
}

TEST(SimulatedSampling, FixedOverheadIsAddedBeforeContention) {
  RuntimeProfile p{"py", 20.0, 20.0, 24, 1.0, 80.0};
  auto rng = make_stream(1, 0);
  EXPECT_NEAR(sample_startup_ms(p, 1, rng), 100.0, 1e-9);
  EXPECT_NEAR(sample_startup_ms(p, 48, rng), 200.0, 1e-9);
}

TEST(SimulatedSampling, SameSeedSameSequence) {
  auto p = default_profiles().at("firecracker");
  EXPECT_EQ(draw(p, 5, 5000, 77), draw(p, 5, 5000, 77));
  EXPECT_NE(draw(p, 5, 50, 77), draw(p, 5, 50, 78));
  auto s0 = make_stream(77, 0), s1 = make_stream(77, 1);
  EXPECT_NE(s0(), s1());
}

TEST(SimulatedDriver, VirtualModeReturnsImmediatelyAndEchoes) {
  SimulatedDriver driver(default_profiles(), {SimulationMode::virtual_time, 1, 4, 0.0});
  const auto& p = driver.profiles().at("docker-cli");
  auto start = SteadyClock::read();
  auto r = driver.simulate(p, 1, 0, ms_to_ns(30000), "payload");
  EXPECT_LT(SteadyClock::read() - start, 50'000'000);
  EXPECT_EQ(r.outcome, Outcome::ok);
  EXPECT_EQ(r.output, "payload");
  EXPECT_GT(r.startup_ns, ms_to_ns(100));
  EXPECT_EQ(r.execution_ns, 0);
  EXPECT_EQ(r.virtual_ns, r.startup_ns);
  EXPECT_EQ(driver.live_executor_count(), 0u);
}

TEST(SimulatedDriver, RealtimeModeBlocks) {
  ProfileTable table;
  table.add({"fixed", 30.0, 30.0});
  SimulatedDriver driver(table, {SimulationMode::realtime, 1, 1, 5.0});
  auto start = SteadyClock::read();
  auto r = driver.simulate(table.at("fixed"), 1, 0, ms_to_ns(1000));
  auto elapsed = SteadyClock::read() - start;
  EXPECT_EQ(r.outcome, Outcome::ok);
  EXPECT_NEAR(ns_to_ms(r.startup_ns), 30.0, 1e-6);
  EXPECT_EQ(r.execution_ns, ms_to_ns(5.0));
  EXPECT_GE(elapsed, ms_to_ns(35.0));
  EXPECT_EQ(r.virtual_ns, 0);
  EXPECT_EQ(driver.live_executor_count(), 0u);
}

TEST(SimulatedDriver, TimeoutCapsSpentTime) {
  ProfileTable table;
  table.add({"slow", 500.0, 500.0});
  SimulatedDriver driver(table, {SimulationMode::virtual_time, 1, 1, 0.0});
  auto r = driver.simulate(table.at("slow"), 1, 0, ms_to_ns(50));
  EXPECT_EQ(r.outcome, Outcome::timeout);
  EXPECT_EQ(r.virtual_ns, ms_to_ns(50));
  EXPECT_TRUE(r.output.empty());
}

TEST(SimulatedDriver, ExecuteUnknownProfile) {
  SimulatedDriver driver(default_profiles(), {SimulationMode::virtual_time});
  FunctionSpec spec;
  spec.name = "ghost";
  spec.driver = DriverKind::simulated;
  spec.profile_name = "no-such-profile";
  ExecutionRequest request{spec, "", {}, ClockReading{} + ms_to_ns(1000)};
  EXPECT_EQ(driver.execute(request).outcome, Outcome::image_missing);
}

TEST(SimulatedDriver, StreamsAreIndependentPerWorker) {
  auto table = default_profiles();
  SimulatedDriver a(table, {SimulationMode::virtual_time, 9, 4, 0.0});
  SimulatedDriver b(table, {SimulationMode::virtual_time, 9, 4, 0.0});
  const auto& p = table.at("gvisor");
  // Interleaving draws across streams must not change any stream's sequence.
  std::vector<std::int64_t> a0, b0;
  for (int i = 0; i < 50; ++i) {
    a0.push_back(a.simulate(p, 1, 0, ms_to_ns(1e6)).startup_ns);
    a.simulate(p, 1, 1, ms_to_ns(1e6));
  }
  for (int i = 0; i < 50; ++i) b0.push_back(b.simulate(p, 1, 0, ms_to_ns(1e6)).startup_ns);
  EXPECT_EQ(a0, b0);
}

TEST(Profiles, SaveLoadRoundTrip) {
  coldfaas::testing::TempDir dir;
  auto path = dir.path() / "profiles.json";
  auto table = default_profiles();
  save_profiles(table, path);
  auto back = load_profiles(path);
  EXPECT_EQ(back.list(), table.list());
}
