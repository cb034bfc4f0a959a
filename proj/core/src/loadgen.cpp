#include "coldfaas/loadgen.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <latch>
#include <queue>
#include <random>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "coldfaas/error.hpp"
#include "coldfaas/json.hpp"
#include "coldfaas/simulated_driver.hpp"
#include "http_client.hpp"

namespace coldfaas {

namespace {

std::int64_t unix_ms_now() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Outcome outcome_from_status(int status) {
  switch (status) {
    case 200: return Outcome::ok;
    case 404: return Outcome::not_found;
    case 408: return Outcome::timeout;
    case 413: return Outcome::payload_too_large;
    case 429: return Outcome::rejected;
    default: return Outcome::function_error;
  }
}

std::string function_from_path(const std::string& path) {
  auto query = path.find('?');
  std::string clean = path.substr(0, query);
  auto slash = clean.rfind('/');
  return slash == std::string::npos ? clean : clean.substr(slash + 1);
}

struct LaneSample {
  int index;
  InvocationRecord record;
};

}  // namespace

std::string_view to_string(ConnectionMode mode) {
  return mode == ConnectionMode::per_request ? "per-request" : "keep-alive";
}

std::optional<ConnectionMode> parse_connection_mode(std::string_view text) {
  if (text == "per-request" || text == "per_request") return ConnectionMode::per_request;
  if (text == "keep-alive" || text == "keep_alive") return ConnectionMode::keep_alive;
  return std::nullopt;
}

void validate(const BenchConfig& config) {
  if (config.total_requests < 1) throw Error(ErrorCode::invalid_argument, "total_requests must be >= 1");
  if (config.parallelism < 1) throw Error(ErrorCode::invalid_argument, "parallelism must be >= 1");
  if (config.parallelism > config.total_requests) {
    throw Error(ErrorCode::invalid_argument, "parallelism must not exceed total_requests");
  }
}

std::size_t SampleSet::ok_count() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const auto& r) { return r.outcome == Outcome::ok; }));
}

std::vector<int> lane_quotas(int total_requests, int parallelism) {
  std::vector<int> quotas(static_cast<std::size_t>(std::max(parallelism, 0)), 0);
  for (int k = 0; k < parallelism; ++k) {
    quotas[static_cast<std::size_t>(k)] = k < total_requests ? (total_requests - k + parallelism - 1) / parallelism : 0;
  }
  return quotas;
}

std::string request_id_for(std::uint64_t seed, int index) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::uint64_t v = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index)));
  std::string id(16, '0');
  for (int i = 15; i >= 0; --i) {
    id[static_cast<std::size_t>(i)] = kHex[v & 0xf];
    v >>= 4;
  }
  return id;
}

SampleSet run_bench(const BenchConfig& config) {
  validate(config);
  const http::Target target = http::resolve_target(config.target_url);
  {
    http::Connection probe;
    std::int64_t ignored = 0;
    std::string error;
    if (!probe.open(target, config.request_timeout, ignored, error)) {
      throw Error(ErrorCode::unreachable, config.target_url + ": " + error);
    }
  }

  std::string method = config.method;
  if (method.empty()) {
    method = (!config.payload.empty() || target.path.rfind("/invoke/", 0) == 0) ? "POST" : "GET";
  }
  const std::string function = function_from_path(target.path);
  const bool keep_alive = config.connection_mode == ConnectionMode::keep_alive;
  const auto quotas = lane_quotas(config.total_requests, config.parallelism);

  std::vector<std::vector<LaneSample>> per_lane(quotas.size());
  std::latch ready(static_cast<std::ptrdiff_t>(quotas.size()) + 1);

  auto lane_body = [&](int lane) {
    auto& out = per_lane[static_cast<std::size_t>(lane)];
    out.reserve(static_cast<std::size_t>(quotas[static_cast<std::size_t>(lane)]));
    http::Connection conn;
    ready.arrive_and_wait();
    for (int i = 0; i < quotas[static_cast<std::size_t>(lane)]; ++i) {
      const int index = lane + i * config.parallelism;
      InvocationRecord record;
      record.request_id = request_id_for(config.seed, index);
      record.function = function;
      record.lane = lane;
      record.arrival = SteadyClock::read();

      std::int64_t setup_ns = 0;
      std::string error;
      http::Response response;
      bool done = false;
      for (int attempt = 0; attempt < 2 && !done; ++attempt) {
        const bool reused = conn.is_open();
        if (!reused) {
          std::int64_t connect_ns = 0;
          if (!conn.open(target, config.request_timeout, connect_ns, error)) break;
          setup_ns += connect_ns;
        }
        done = conn.exchange(target, method, config.payload, keep_alive, response, error);
        // A reused keep-alive connection may have been closed by the server
        // while idle; retry once on a fresh one.
        if (!done && !reused) break;
      }
      record.total_ns = std::max<std::int64_t>(1, SteadyClock::read() - record.arrival);
      if (!keep_alive) conn.close();
      record.connection_setup_ns = setup_ns;
      if (!done) {
        record.outcome = Outcome::transport_error;
      } else {
        auto outcome_header = response.headers.find("x-outcome");
        auto parsed = outcome_header != response.headers.end() ? parse_outcome(outcome_header->second) : std::nullopt;
        record.outcome = parsed.value_or(outcome_from_status(response.status));
        record.queue_wait_ns = response.header_int("x-queue-wait-ns").value_or(0);
        record.startup_ns = response.header_int("x-startup-ns").value_or(0);
        record.execution_ns = response.header_int("x-execution-ns").value_or(0);
        if (auto warm = response.headers.find("x-warm"); warm != response.headers.end()) {
          record.warm = warm->second == "true";
        }
      }
      out.push_back({index, std::move(record)});
    }
  };

  SampleSet set;
  set.config = config;
  set.label = function;
  std::vector<std::thread> lanes;
  lanes.reserve(quotas.size());
  for (int k = 0; k < static_cast<int>(quotas.size()); ++k) lanes.emplace_back(lane_body, k);
  set.started_unix_ms = unix_ms_now();
  set.started = SteadyClock::read();
  ready.arrive_and_wait();
  for (auto& t : lanes) t.join();
  set.finished = SteadyClock::read();
  set.finished_unix_ms = unix_ms_now();

  std::vector<LaneSample> merged;
  merged.reserve(static_cast<std::size_t>(config.total_requests));
  for (auto& lane : per_lane) {
    for (auto& s : lane) merged.push_back(std::move(s));
  }
  std::sort(merged.begin(), merged.end(), [](const LaneSample& a, const LaneSample& b) { return a.index < b.index; });
  set.samples.reserve(merged.size());
  for (auto& s : merged) set.samples.push_back(std::move(s.record));
  return set;
}

std::vector<SampleSet> sweep(const std::vector<int>& levels, const BenchConfig& base,
                             std::chrono::milliseconds cooldown) {
  std::vector<SampleSet> results;
  results.reserve(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i > 0) std::this_thread::sleep_for(cooldown);
    BenchConfig config = base;
    config.parallelism = levels[i];
    try {
      results.push_back(run_bench(config));
    } catch (const std::exception& e) {
      SampleSet failed;
      failed.config = config;
      failed.failed = true;
      failed.error = e.what();
      results.push_back(std::move(failed));
    }
  }
  return results;
}

SampleSet run_virtual_bench(const VirtualBenchConfig& config) {
  validate(config.profile);
  if (config.total_requests < 1 || config.parallelism < 1 || config.workers < 1 ||
      config.parallelism > config.total_requests) {
    throw Error(ErrorCode::invalid_argument, "virtual bench needs 1 <= parallelism <= total_requests, workers >= 1");
  }

  struct Pending {
    int index;
    int lane;
    std::int64_t arrival;
  };
  struct Completion {
    std::int64_t time;
    std::uint64_t seq;
    int worker;
    Pending request;
    std::int64_t started;
    std::int64_t startup_ns;
    std::int64_t execution_ns;
    bool operator>(const Completion& other) const {
      return time != other.time ? time > other.time : seq > other.seq;
    }
  };

  const auto quotas = lane_quotas(config.total_requests, config.parallelism);
  std::vector<int> issued(quotas.size(), 0);
  std::vector<std::mt19937_64> streams;
  streams.reserve(static_cast<std::size_t>(config.workers));
  for (int w = 0; w < config.workers; ++w) streams.push_back(make_stream(config.seed, static_cast<std::uint64_t>(w)));

  std::set<int> free_workers;
  for (int w = 0; w < config.workers; ++w) free_workers.insert(w);
  std::deque<Pending> queue;
  std::priority_queue<Completion, std::vector<Completion>, std::greater<>> events;
  std::uint64_t seq = 0;
  int in_flight = 0;
  const std::int64_t execution_ns = ms_to_ns(config.execution_ms);

  std::vector<InvocationRecord> records(static_cast<std::size_t>(config.total_requests));
  std::int64_t last_completion = 0;

  auto start = [&](int worker, const Pending& request, std::int64_t now) {
    ++in_flight;
    double startup_ms = sample_startup_ms(config.profile, in_flight, streams[static_cast<std::size_t>(worker)]);
    std::int64_t startup_ns = std::max<std::int64_t>(1, ms_to_ns(startup_ms));
    events.push({now + startup_ns + execution_ns, seq++, worker, request, now, startup_ns, execution_ns});
  };
  auto issue = [&](int lane, std::int64_t now) {
    auto l = static_cast<std::size_t>(lane);
    if (issued[l] >= quotas[l]) return;
    Pending request{lane + issued[l] * config.parallelism, lane, now};
    ++issued[l];
    if (!free_workers.empty()) {
      int worker = *free_workers.begin();
      free_workers.erase(free_workers.begin());
      start(worker, request, now);
    } else {
      queue.push_back(request);
    }
  };

  for (int lane = 0; lane < static_cast<int>(quotas.size()); ++lane) issue(lane, 0);
  while (!events.empty()) {
    Completion done = events.top();
    events.pop();
    --in_flight;
    last_completion = std::max(last_completion, done.time);

    InvocationRecord& record = records[static_cast<std::size_t>(done.request.index)];
    record.request_id = request_id_for(config.seed, done.request.index);
    record.function = config.function;
    record.lane = done.request.lane;
    record.arrival = ClockReading{done.request.arrival};
    record.queue_wait_ns = done.started - done.request.arrival;
    record.startup_ns = done.startup_ns;
    record.execution_ns = done.execution_ns;
    record.total_ns = done.time - done.request.arrival;
    record.connection_setup_ns = 0;
    record.outcome = Outcome::ok;

    if (!queue.empty()) {
      Pending next = queue.front();
      queue.pop_front();
      start(done.worker, next, done.time);
    } else {
      free_workers.insert(done.worker);
    }
    issue(done.request.lane, done.time);
  }

  SampleSet set;
  set.samples = std::move(records);
  set.label = config.profile.name;
  set.config.target_url = "virtual://" + config.profile.name;
  set.config.total_requests = config.total_requests;
  set.config.parallelism = config.parallelism;
  set.config.seed = config.seed;
  set.started = ClockReading{0};
  set.finished = ClockReading{last_completion};
  set.started_unix_ms = set.finished_unix_ms = unix_ms_now();
  return set;
}

std::filesystem::path meta_path_for(const std::filesystem::path& samples_path) {
  auto p = samples_path;
  p += ".meta.json";
  return p;
}

void write_samples(const SampleSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  for (const auto& r : set.samples) out << nlohmann::json(r).dump() << '\n';
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());

  nlohmann::json meta{{"label", set.label},
                      {"target_url", set.config.target_url},
                      {"total_requests", set.config.total_requests},
                      {"parallelism", set.config.parallelism},
                      {"connection_mode", to_string(set.config.connection_mode)},
                      {"seed", set.config.seed},
                      {"method", set.config.method},
                      {"payload_bytes", set.config.payload.size()},
                      {"started_unix_ms", set.started_unix_ms},
                      {"finished_unix_ms", set.finished_unix_ms},
                      {"started_ns", set.started.ns},
                      {"finished_ns", set.finished.ns},
                      {"failed", set.failed},
                      {"error", set.error}};
  std::ofstream meta_out(meta_path_for(path), std::ios::trunc);
  if (!meta_out) throw Error(ErrorCode::io_error, "cannot write " + meta_path_for(path).string());
  meta_out << meta.dump(2) << '\n';
}

SampleSet read_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  SampleSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      set.samples.push_back(nlohmann::json::parse(line).get<InvocationRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::invalid_argument, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  set.label = path.stem().string();

  if (std::ifstream meta_in(meta_path_for(path)); meta_in) {
    auto meta = nlohmann::json::parse(meta_in, nullptr, false);
    if (!meta.is_discarded()) {
      set.label = meta.value("label", set.label);
      set.config.target_url = meta.value("target_url", std::string());
      set.config.total_requests = meta.value("total_requests", static_cast<int>(set.samples.size()));
      set.config.parallelism = meta.value("parallelism", 1);
      set.config.connection_mode =
          parse_connection_mode(meta.value("connection_mode", std::string("keep-alive"))).value_or(ConnectionMode::keep_alive);
      set.config.seed = meta.value("seed", std::uint64_t{1});
      set.config.method = meta.value("method", std::string());
      set.started_unix_ms = meta.value("started_unix_ms", std::int64_t{0});
      set.finished_unix_ms = meta.value("finished_unix_ms", std::int64_t{0});
      set.started.ns = meta.value("started_ns", std::int64_t{0});
      set.finished.ns = meta.value("finished_ns", std::int64_t{0});
      set.failed = meta.value("failed", false);
      set.error = meta.value("error", std::string());
      return set;
    }
  }
  if (!set.samples.empty()) {
    std::int64_t lo = set.samples.front().arrival.ns, hi = lo;
    int max_lane = 0;
    for (const auto& r : set.samples) {
      lo = std::min(lo, r.arrival.ns);
      hi = std::max(hi, r.arrival.ns + r.total_ns);
      max_lane = std::max(max_lane, r.lane);
    }
    set.started.ns = lo;
    set.finished.ns = hi;
    set.config.parallelism = max_lane + 1;
  }
  set.config.total_requests = static_cast<int>(set.samples.size());
  return set;
}

}  // namespace coldfaas
