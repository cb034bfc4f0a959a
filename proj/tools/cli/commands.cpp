#include "commands.hpp"

#include <httplib.h>
#include <signal.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coldfaas/error.hpp"
#include "coldfaas/gateway.hpp"
#include "coldfaas/json.hpp"
#include "coldfaas/loadgen.hpp"
#include "coldfaas/platform.hpp"
#include "coldfaas/stats.hpp"

namespace fs = std::filesystem;

namespace coldfaas::cli {

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ProfileTable profiles_from(const std::string& file) {
  return file.empty() ? default_profiles() : load_profiles(file);
}

std::string make_payload(const BenchOptions& o) {
  if (!o.payload_file.empty()) return read_file(o.payload_file);
  if (o.payload_size > 0) {
    std::mt19937_64 rng(o.seed);
    std::string bytes(o.payload_size, '\0');
    for (auto& b : bytes) b = static_cast<char>(rng() & 0xff);
    return bytes;
  }
  return o.payload;
}

SampleSet bench_once(const BenchOptions& o, int parallelism) {
  if (o.virtual_time) {
    if (o.profile.empty()) throw Error(ErrorCode::invalid_argument, "--virtual needs --profile");
    VirtualBenchConfig config;
    config.profile = profiles_from(o.profiles_file).at(o.profile);
    config.total_requests = o.n;
    config.parallelism = parallelism;
    config.workers = o.workers;
    config.seed = o.seed;
    config.execution_ms = o.execution_ms;
    config.function = o.profile;
    auto set = run_virtual_bench(config);
    if (!o.label.empty()) set.label = o.label;
    return set;
  }
  if (o.url.empty()) throw Error(ErrorCode::invalid_argument, "--url is required");
  BenchConfig config;
  config.target_url = o.url;
  config.total_requests = o.n;
  config.parallelism = parallelism;
  config.connection_mode = parse_connection_mode(o.conn).value_or(ConnectionMode::keep_alive);
  config.seed = o.seed;
  config.payload = make_payload(o);
  config.method = o.method;
  auto set = coldfaas::run_bench(config);
  if (!o.label.empty()) set.label = o.label;
  return set;
}

void print_summary(const SampleSet& set, std::ostream& out) {
  auto r = summarize(set);
  out << set.label << " c=" << r.parallelism << " ok=" << r.total.count << " failed=" << r.failed
      << " p50=" << ns_to_ms(r.total.p50_ns) << "ms p99=" << ns_to_ms(r.total.p99_ns)
      << "ms throughput=" << r.throughput_rps << "/s\n";
}

// A file holding report JSON (object or array) or JSON-lines samples.
std::vector<BenchReport> reports_from_file(const fs::path& path) {
  auto text = read_file(path);
  auto doc = nlohmann::json::parse(text, nullptr, false);
  if (!doc.is_discarded() && (doc.is_array() || (doc.is_object() && doc.contains("total")))) {
    return load_reports_json(path);
  }
  return {summarize(read_samples(path))};
}

}  // namespace

int run_serve(const ServeOptions& o) {
  PlatformConfig config;
  config.registry_dir = o.registry_dir;
  config.dispatcher.workers = o.workers;
  config.dispatcher.queue_capacity = o.queue_capacity;
  config.dispatcher.max_payload_bytes = o.max_body_bytes;
  config.profiles = profiles_from(o.profiles_file);
  config.simulation_mode = o.sim_mode == "virtual" ? SimulationMode::virtual_time : SimulationMode::realtime;
  config.seed = o.seed;
  config.warm_pool.idle_timeout =
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::duration<double>(o.warm_idle_timeout_s));
  config.warm_pool.resume_ms = o.warm_resume_ms;
  config.warm_pool.mode = config.simulation_mode;
  if (!o.warm_inner_profile.empty()) config.warm_pool.inner_profile = o.warm_inner_profile;

  GatewayConfig gateway_config;
  gateway_config.listen_address = o.listen;
  gateway_config.http_threads = o.http_threads;
  gateway_config.max_body_bytes = o.max_body_bytes;
  gateway_config.keep_alive = !o.no_keep_alive;

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Platform platform(std::move(config));
  Gateway gateway(gateway_config, platform);
  int port = gateway.start();
  std::cout << "listening on " << gateway.base_url() << " (port " << port << "), workers=" << o.workers
            << ", registry=" << o.registry_dir << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  std::cout << "shutting down" << std::endl;
  gateway.stop();
  return 0;
}

int run_deploy(const DeployOptions& o) {
  nlohmann::json spec;
  if (!o.spec_file.empty()) {
    spec = nlohmann::json::parse(read_file(o.spec_file));
  } else {
    if (o.name.empty()) throw Error(ErrorCode::invalid_argument, "--name or --spec is required");
    spec = {{"name", o.name}, {"driver", o.driver}, {"timeout_ms", o.timeout_ms}, {"memory_mb", o.memory_mb}};
    if (!o.profile.empty()) spec["profile_name"] = o.profile;
  }
  httplib::MultipartFormDataItems items{{"spec", spec.dump(), "spec.json", "application/json"}};
  if (!o.image.empty()) items.push_back({"image", read_file(o.image), "image", "application/octet-stream"});

  httplib::Client client(o.url);
  auto res = client.Post(o.overwrite ? "/deploy?overwrite=true" : "/deploy", items);
  if (!res) throw Error(ErrorCode::unreachable, o.url + ": " + httplib::to_string(res.error()));
  std::cout << res->status << " " << res->body << "\n";
  return res->status == 201 ? 0 : 1;
}

int run_bench(const BenchOptions& o) {
  auto set = bench_once(o, o.c);
  if (!o.out.empty()) write_samples(set, o.out);
  print_summary(set, std::cout);
  return 0;
}

int run_sweep(const SweepOptions& o) {
  fs::create_directories(o.out_dir);
  std::vector<SampleSet> results;
  if (o.bench.virtual_time) {
    for (int level : o.levels) results.push_back(bench_once(o.bench, level));
  } else {
    BenchOptions payload_source = o.bench;
    BenchConfig base;
    base.target_url = o.bench.url;
    base.total_requests = o.bench.n;
    base.connection_mode = parse_connection_mode(o.bench.conn).value_or(ConnectionMode::keep_alive);
    base.seed = o.bench.seed;
    base.payload = make_payload(payload_source);
    base.method = o.bench.method;
    results = sweep(o.levels, base, std::chrono::milliseconds(o.cooldown_ms));
  }
  int status = 0;
  for (auto& set : results) {
    if (!o.bench.label.empty()) set.label = o.bench.label;
    auto path = fs::path(o.out_dir) / ("c" + std::to_string(set.config.parallelism) + ".json");
    write_samples(set, path);
    if (set.failed) {
      std::cout << "c=" << set.config.parallelism << " failed: " << set.error << "\n";
      status = 1;
    } else {
      print_summary(set, std::cout);
    }
  }
  return status;
}

int run_report(const ReportOptions& o) {
  auto format = parse_export_format(o.format);
  if (!format) throw Error(ErrorCode::invalid_argument, "unknown format " + o.format);
  std::vector<BenchReport> reports;
  for (const auto& in : o.inputs) reports.push_back(summarize(read_samples(in)));
  if (o.out.empty()) {
    std::cout << render(reports, *format);
  } else {
    export_reports(reports, *format, o.out);
  }
  return 0;
}

int run_compare(const CompareOptions& o) {
  std::vector<NamedReport> named;
  for (const auto& input : o.inputs) {
    std::string name, path = input;
    if (auto eq = input.find('='); eq != std::string::npos) {
      name = input.substr(0, eq);
      path = input.substr(eq + 1);
    }
    auto reports = reports_from_file(path);
    for (auto& r : reports) {
      std::string n = name.empty() ? fs::path(path).stem().string() : name;
      if (reports.size() > 1) n += "@" + std::to_string(r.parallelism);
      named.emplace_back(n, std::move(r));
    }
  }
  std::cout << compare(named).to_table();
  int status = 0;
  for (const auto& a : o.assertions) {
    auto result = evaluate_assertion(a, named);
    std::cout << (result.holds ? "PASS  " : "FAIL  ") << a << "   (" << result.lhs << " vs " << result.rhs << ")\n";
    if (!result.holds) status = 1;
  }
  return status;
}

int run_profiles(const ProfilesOptions& o) {
  auto table = default_profiles();
  if (o.out.empty()) {
    std::cout << nlohmann::json(table.list()).dump(2) << "\n";
  } else {
    save_profiles(table, o.out);
  }
  return 0;
}

int run_sizes(const SizesOptions& o) {
  Registry registry(o.registry_dir);
  for (const auto& row : registry.report_sizes()) {
    std::cout << row.name << "\t" << row.size_bytes << "\n";
  }
  return 0;
}

}  // namespace coldfaas::cli
