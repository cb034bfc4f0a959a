#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace coldfaas::cli {

struct ServeOptions {
  std::string listen = "127.0.0.1:8080";
  int workers = 20;
  std::optional<std::size_t> queue_capacity;
  std::string profiles_file;
  std::string registry_dir = "registry";
  std::string sim_mode = "realtime";
  std::uint64_t seed = 1;
  double warm_idle_timeout_s = 30.0;
  double warm_resume_ms = 13.6;
  std::string warm_inner_profile;
  int http_threads = 96;
  std::size_t max_body_bytes = 1 << 20;
  bool no_keep_alive = false;
};

struct DeployOptions {
  std::string url = "http://127.0.0.1:8080";
  std::string spec_file;
  std::string name;
  std::string driver = "process";
  std::string image;
  std::string profile;
  std::int64_t timeout_ms = 30000;
  std::int64_t memory_mb = 128;
  bool overwrite = false;
};

struct BenchOptions {
  std::string url;
  int n = 10000;
  int c = 1;
  std::string conn = "keep-alive";
  std::uint64_t seed = 1;
  std::string out;
  std::string payload;
  std::string payload_file;
  std::size_t payload_size = 0;
  std::string method;
  // virtual-time mode
  bool virtual_time = false;
  std::string profile;
  std::string profiles_file;
  int workers = 20;
  double execution_ms = 0.0;
  std::string label;
};

struct SweepOptions {
  BenchOptions bench;
  std::vector<int> levels{1, 10, 20, 40};
  std::string out_dir = ".";
  int cooldown_ms = 2000;
};

struct ReportOptions {
  std::vector<std::string> inputs;
  std::string format = "json";
  std::string out;
};

struct CompareOptions {
  std::vector<std::string> inputs;
  std::vector<std::string> assertions;
};

struct ProfilesOptions {
  std::string out;
};

struct SizesOptions {
  std::string registry_dir = "registry";
};

int run_serve(const ServeOptions& options);
int run_deploy(const DeployOptions& options);
int run_bench(const BenchOptions& options);
int run_sweep(const SweepOptions& options);
int run_report(const ReportOptions& options);
int run_compare(const CompareOptions& options);
int run_profiles(const ProfilesOptions& options);
int run_sizes(const SizesOptions& options);

}  // namespace coldfaas::cli
