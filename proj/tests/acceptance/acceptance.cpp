// One line per criterion: "[PASS] ACn name: detail" or "[FAIL] ...".
// Exit status is the number of failed criteria (0 when all pass).

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "coldfaas/error.hpp"
#include "coldfaas/loadgen.hpp"
#include "coldfaas/profiles.hpp"
#include "coldfaas/stats.hpp"
#include "server_support.hpp"

extern char** environ;

using namespace coldfaas;
using namespace coldfaas::testing;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), format, a);
  return buf;
}

std::string ms(std::int64_t ns) { return fmt("%.3f ms", ns_to_ms(ns)); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool within(double value, double target, double fraction) { return std::abs(value - target) <= fraction * target; }

int run_cli(const std::vector<std::string>& args, const std::filesystem::path& stdout_path) {
  std::vector<std::string> argv_store{COLDFAAS_TEST_CLI};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 1, stdout_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  pid_t pid = 0;
  int rc = posix_spawn(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) return -1;
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

SampleSet virtual_run(const RuntimeProfile& profile, int n, int parallelism, int workers, std::uint64_t seed = 1) {
  VirtualBenchConfig config;
  config.profile = profile;
  config.total_requests = n;
  config.parallelism = parallelism;
  config.workers = workers;
  config.seed = seed;
  config.function = profile.name;
  return run_virtual_bench(config);
}

BenchConfig bench(const std::string& url, int n, int c, ConnectionMode mode = ConnectionMode::keep_alive) {
  BenchConfig config;
  config.target_url = url;
  config.total_requests = n;
  config.parallelism = c;
  config.connection_mode = mode;
  return config;
}

// Shared by the first two criteria: one cold-only run over a process echo.
struct ColdRun {
  bool ran = false;
  std::string error;
  double seconds = 0;
  std::size_t ok = 0;
  std::size_t live = 0;
  std::vector<int> children;
  json waste;
};

ColdRun& cold_run() {
  static ColdRun run = [] {
    ColdRun r;
    try {
      TestServer server;
      auto client = server.client();
      auto res = deploy_multipart(client, {{"name", "echo"}, {"driver", "process"}}, read_file(function_path("echo")));
      if (!res || res->status != 201) throw std::runtime_error("deploy failed");
      auto config = bench(server.url() + "/invoke/echo", 1000, 20);
      config.payload = "cold";
      auto start = std::chrono::steady_clock::now();
      auto set = run_bench(config);
      r.seconds = seconds_since(start);
      r.ok = set.ok_count();
      r.live = server.platform->process_driver().live_executor_count() +
               server.platform->simulated_driver().live_executor_count();
      r.children = child_pids();
      r.waste = server.get_json("/waste");
      r.ran = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    return r;
  }();
  return run;
}

Verdict ac1_cold_only() {
  auto& r = cold_run();
  if (!r.ran) return {false, r.error};
  bool pass = r.ok == 1000 && r.live == 0 && r.children.empty() && r.seconds < 60.0;
  std::ostringstream d;
  d << "ok=" << r.ok << "/1000 live_executors=" << r.live << " orphans=" << r.children.size()
    << " runtime=" << fmt("%.1f s", r.seconds);
  return {pass, d.str()};
}

Verdict ac2_zero_waste() {
  auto& cold = cold_run();
  if (!cold.ran) return {false, cold.error};
  const double cold_idle = cold.waste["idle_executor_seconds"].get<double>();

  PlatformConfig config;
  config.warm_pool.idle_timeout = std::chrono::seconds(30);
  TestServer server(std::move(config));
  auto client = server.client();
  auto res = deploy_multipart(client, {{"name", "echo"}, {"driver", "warmpool"}}, read_file(function_path("echo")));
  if (!res || res->status != 201) return {false, "warm-pool deploy failed"};
  auto bench_config = bench(server.url() + "/invoke/echo", 1000, 20);
  bench_config.payload = "cold";
  auto set = run_bench(bench_config);
  auto waste = server.get_json("/waste");
  const double warm_idle = waste["idle_executor_seconds"].get<double>();
  const auto warm_hits = waste["warm_hits"].get<std::uint64_t>();
  bool pass = cold_idle == 0.0 && warm_idle > 0.0 && warm_hits >= 1 && set.ok_count() == 1000;
  std::ostringstream d;
  d << "cold idle_executor_seconds=" << cold_idle << "; warm-pool idle_executor_seconds=" << fmt("%.3f", warm_idle)
    << " warm_hits=" << warm_hits << " cold_starts=" << waste["cold_starts"];
  return {pass, d.str()};
}

Verdict ac3_table_one() {
  auto start = std::chrono::steady_clock::now();
  const auto table = default_profiles();
  const std::vector<std::pair<std::string, double>> rows{
      {"fn-includeos-cold", 33.4}, {"fn-docker-cold", 288.3}, {"lambda-cold", 449.7}, {"lambda-warm", 78.0}};
  TempDir dir;
  std::vector<std::string> inputs;
  bool medians_ok = true;
  std::ostringstream d;
  for (const auto& [name, target] : rows) {
    auto set = virtual_run(table.at(name), 10000, 1, 20);
    auto report = summarize(set);
    double p50 = ns_to_ms(report.total.p50_ns);
    medians_ok = medians_ok && within(p50, target, 0.05);
    d << name << " p50=" << fmt("%.2f", p50) << " ";
    auto path = dir.path() / (name + ".jsonl");
    write_samples(set, path);
    inputs.push_back(name + "=" + path.string());
  }
  std::vector<std::string> args{"compare", "--in"};
  args.insert(args.end(), inputs.begin(), inputs.end());
  for (auto a : {"fn-includeos-cold.p50 < fn-docker-cold.p50", "fn-docker-cold.p50 < lambda-cold.p50",
                 "fn-includeos-cold.p50 + 6.9 < lambda-warm.p50 + 50.1"}) {
    args.push_back("--assert");
    args.push_back(a);
  }
  int rc = run_cli(args, dir.path() / "compare.txt");
  double secs = seconds_since(start);
  d << "compare --assert exit=" << rc << " runtime=" << fmt("%.1f s", secs);
  return {medians_ok && rc == 0 && secs < 30.0, d.str()};
}

Verdict ac4_overload_knee() {
  const auto table = default_profiles();
  const auto& kata = table.at("kata");
  auto report = summarize(virtual_run(kata, 10000, kata.cores, kata.cores));
  double p50 = ns_to_ms(report.total.p50_ns), p99 = ns_to_ms(report.total.p99_ns);
  bool pass = within(p50, 2200.0, 0.05) && within(p99, 3300.0, 0.10);
  std::ostringstream d;
  d << "kata@" << kata.cores << " p50=" << fmt("%.1f", p50) << " p99=" << fmt("%.1f", p99) << "; ";
  int knee_ok = 0;
  std::string failures;
  for (auto profile : table.list()) {
    profile.cores = 24;
    auto at20 = summarize(virtual_run(profile, 10000, 20, 40)).total.p50_ns;
    auto at40 = summarize(virtual_run(profile, 10000, 40, 40)).total.p50_ns;
    if (at40 > at20) {
      ++knee_ok;
    } else {
      failures += " " + profile.name;
    }
  }
  pass = pass && knee_ok == static_cast<int>(table.size());
  d << "p50(c=40) > p50(c=20) for " << knee_ok << "/" << table.size() << " profiles" << failures;
  return {pass, d.str()};
}

Verdict ac5_includeos_band() {
  auto profile = default_profiles().at("includeos-hvt");
  profile.cores = 24;
  auto report = summarize(virtual_run(profile, 10000, 10, 20));
  double p50 = ns_to_ms(report.total.p50_ns);
  return {p50 >= 8.0 && p50 <= 15.0, "includeos-hvt p50=" + fmt("%.2f ms", p50) + " at c=10, cores=24"};
}

// Sort the sample, then take the element at index ceil(p*n/100) - 1 computed
// with integer arithmetic.
std::int64_t oracle(const std::vector<std::int64_t>& sorted, int p) {
  const std::size_t n = sorted.size();
  std::size_t rank = (static_cast<std::size_t>(p) * n) / 100;
  if (rank * 100 < static_cast<std::size_t>(p) * n) ++rank;
  return sorted[std::max<std::size_t>(rank, 1) - 1];
}

Verdict ac6_percentile_oracle() {
  std::mt19937_64 rng(6);
  int mismatches = 0;
  for (int iter = 0; iter < 1000; ++iter) {
    const std::size_t n = 1 + rng() % 5000;
    const std::uint64_t range = 1 + rng() % 2000;
    SampleSet set;
    set.config.parallelism = 1;
    std::vector<std::int64_t> values;
    for (std::size_t i = 0; i < n; ++i) {
      InvocationRecord r;
      r.total_ns = static_cast<std::int64_t>(rng() % range);
      values.push_back(r.total_ns);
      set.samples.push_back(r);
    }
    set.finished = {1};
    auto report = summarize(set);
    std::sort(values.begin(), values.end());
    const auto& t = report.total;
    if (t.min_ns != values.front() || t.max_ns != values.back() || t.p1_ns != oracle(values, 1) ||
        t.p25_ns != oracle(values, 25) || t.p50_ns != oracle(values, 50) || t.p75_ns != oracle(values, 75) ||
        t.p99_ns != oracle(values, 99)) {
      ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(1000 - mismatches) + "/1000 sample sets match the sort oracle"};
}

Verdict ac7_closed_loop() {
  TestServer server;
  auto client = server.client();
  deploy_multipart(client, {{"name", "echo"}, {"driver", "process"}}, read_file(function_path("echo")));
  std::atomic<bool> done{false};
  std::uint64_t max_gateway = 0, max_dispatch = 0, polls = 0;
  std::thread sampler([&] {
    auto c = server.client();
    while (!done) {
      auto res = c.Get("/stats");
      if (res && res->status == 200) {
        auto s = json::parse(res->body);
        max_gateway = std::max(max_gateway, s["gateway_in_flight"].get<std::uint64_t>());
        max_dispatch = std::max(max_dispatch, s["in_flight"].get<std::uint64_t>() + s["queued"].get<std::uint64_t>());
        ++polls;
      }
    }
  });
  auto config = bench(server.url() + "/invoke/echo", 1000, 10);
  config.payload = "x";
  auto set = run_bench(config);
  done = true;
  sampler.join();
  const auto high_water = server.gateway->stats().max_in_flight;
  bool pass = max_gateway <= 10 && max_dispatch <= 10 && high_water <= 10 && set.ok_count() == 1000 && polls > 0;
  std::ostringstream d;
  d << "polls=" << polls << " max sampled gateway in_flight=" << max_gateway
    << " max sampled dispatcher in_flight+queued=" << max_dispatch << " gateway high-water=" << high_water;
  return {pass, d.str()};
}

Verdict ac8_protocol() {
  TestServer server;
  auto client = server.client();
  auto res = deploy_multipart(client, {{"name", "echo"}, {"driver", "process"}}, read_file(function_path("echo")));
  if (!res || res->status != 201) return {false, "deploy failed"};
  auto payload = random_bytes(64 * 1024, 8);
  auto inv = client.Post("/invoke/echo", payload, "application/octet-stream");
  if (!inv) return {false, "invoke failed"};
  const auto q = header_ns(*inv, "X-Queue-Wait-Ns"), s = header_ns(*inv, "X-Startup-Ns"),
             e = header_ns(*inv, "X-Execution-Ns"), t = header_ns(*inv, "X-Total-Ns");
  bool identical = inv->body == payload;
  std::ostringstream d;
  d << "status=" << inv->status << " identical=" << (identical ? "yes" : "no") << " total=" << t
    << " >= " << q << "+" << s << "+" << e;
  return {inv->status == 200 && identical && t >= q + s + e, d.str()};
}

Verdict ac9_connection_decomposition() {
  TestServer server;
  const std::string url = server.url() + "/noop";
  run_bench(bench(url, 500, 1));  // warm up the server threads
  auto keep = summarize(run_bench(bench(url, 5000, 1, ConnectionMode::keep_alive)));
  auto fresh = summarize(run_bench(bench(url, 5000, 1, ConnectionMode::per_request)));
  const double diff = static_cast<double>(fresh.total.p50_ns - keep.total.p50_ns);
  const double setup = static_cast<double>(fresh.connection_setup.p50_ns);
  bool pass = setup > 0 && std::abs(diff - setup) <= 0.30 * setup;
  std::ostringstream d;
  d << "p50 per-request=" << ms(fresh.total.p50_ns) << " keep-alive=" << ms(keep.total.p50_ns)
    << " difference=" << fmt("%.3f ms", diff / 1e6) << " connect p50=" << ms(fresh.connection_setup.p50_ns)
    << " ratio=" << fmt("%.2f", setup > 0 ? diff / setup : 0.0);
  return {pass, d.str()};
}

Verdict ac10_noop_shape() {
  PlatformConfig config;
  config.dispatcher.workers = 20;
  TestServer server(std::move(config));
  const std::string url = server.url() + "/noop";
  run_bench(bench(url, 500, 10));
  auto at1 = summarize(run_bench(bench(url, 2000, 1))).total.p50_ns;
  auto at10 = summarize(run_bench(bench(url, 4000, 10))).total.p50_ns;
  auto at40 = summarize(run_bench(bench(url, 4000, 40))).total.p50_ns;
  bool pass = at40 > at10 && at1 < ms_to_ns(5.0);
  return {pass, "p50 c=1 " + ms(at1) + ", c=10 " + ms(at10) + ", c=40 " + ms(at40)};
}

Verdict ac11_warm_ledger() {
  ProfileTable table;
  table.add(fixed_profile("ten-ms", 10.0));
  SimulatedDriver inner(table, {SimulationMode::virtual_time, 1, 1, 0.0});
  WarmPoolDriver pool({std::chrono::seconds(30), 13.6, std::string("ten-ms"), SimulationMode::virtual_time}, inner);
  ManualClock clock;
  pool.start_reaper(clock);
  FunctionSpec spec;
  spec.name = "fn";
  spec.driver = DriverKind::warmpool;
  auto r = pool.execute({spec, "", clock.now(), clock.now() + ms_to_ns(60'000)});
  // No further traffic: let the clock run past the idle deadline.
  clock.set(ClockReading{ms_to_ns(30'010.0)});
  for (int i = 0; i < 5000 && pool.live_executor_count() != 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  pool.stop_reaper();
  auto ledger = pool.ledger();
  bool pass = r.outcome == Outcome::ok && within(ledger.idle_executor_seconds, 30.0, 0.1 / 30.0) && ledger.reaped == 1;
  std::ostringstream d;
  d << "idle_executor_seconds=" << fmt("%.4f", ledger.idle_executor_seconds) << " reaped=" << ledger.reaped
    << " cold_starts=" << ledger.cold_starts;
  return {pass, d.str()};
}

Verdict ac12_determinism() {
  auto profile = default_profiles().at("firecracker");
  auto a = virtual_run(profile, 10000, 40, 20, 4242);
  auto b = virtual_run(profile, 10000, 40, 20, 4242);
  bool same_samples = a.samples == b.samples;
  bool same_reports = summarize(a) == summarize(b);

  TempDir dir;
  std::vector<std::string> base{"bench", "--virtual", "--profile", "kata", "--n", "2000", "--c", "40", "--seed", "9"};
  auto first = base, second = base;
  first.insert(first.end(), {"--out", (dir.path() / "a.jsonl").string()});
  second.insert(second.end(), {"--out", (dir.path() / "b.jsonl").string()});
  int rc1 = run_cli(first, dir.path() / "a.txt"), rc2 = run_cli(second, dir.path() / "b.txt");
  bool same_files = rc1 == 0 && rc2 == 0 && read_file(dir.path() / "a.jsonl") == read_file(dir.path() / "b.jsonl") &&
                    !read_file(dir.path() / "a.jsonl").empty();
  std::ostringstream d;
  d << "samples identical=" << same_samples << " reports identical=" << same_reports
    << " cli sample files identical=" << same_files;
  return {same_samples && same_reports && same_files, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"AC1 cold-only invariant", ac1_cold_only},
      {"AC2 zero idle waste vs warm pool", ac2_zero_waste},
      {"AC3 cold-start medians and ordering", ac3_table_one},
      {"AC4 overload knee", ac4_overload_knee},
      {"AC5 includeos startup band", ac5_includeos_band},
      {"AC6 percentile oracle equivalence", ac6_percentile_oracle},
      {"AC7 closed-loop bound", ac7_closed_loop},
      {"AC8 deploy/invoke round trip", ac8_protocol},
      {"AC9 connection-mode decomposition", ac9_connection_decomposition},
      {"AC10 noop overhead shape", ac10_noop_shape},
      {"AC11 warm-pool ledger arithmetic", ac11_warm_ledger},
      {"AC12 virtual-mode determinism", ac12_determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    auto start = std::chrono::steady_clock::now();
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("[%s] %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
