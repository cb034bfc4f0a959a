#pragma once

#include <dirent.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coldfaas/driver.hpp"
#include "coldfaas/platform.hpp"
#include "coldfaas/registry.hpp"

namespace coldfaas::testing {

inline std::filesystem::path functions_dir() { return COLDFAAS_TEST_FUNCTIONS_DIR; }
inline std::filesystem::path function_path(const std::string& name) { return functions_dir() / name; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline ProcessImage image_for(const std::string& name) {
  auto path = function_path(name);
  return ProcessImage{path, sha256_file_hex(path), std::filesystem::file_size(path)};
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "coldfaas-test-XXXXXX").string();
    path_ = ::mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Scans /proc for processes whose parent is this process (zombies included).
inline std::vector<int> child_pids() {
  std::vector<int> out;
  const int self = static_cast<int>(::getpid());
  for (const auto& entry : std::filesystem::directory_iterator("/proc")) {
    const auto name = entry.path().filename().string();
    if (name.empty() || name.find_first_not_of("0123456789") != std::string::npos) continue;
    std::ifstream stat(entry.path() / "stat");
    std::string line;
    if (!std::getline(stat, line)) continue;
    // pid (comm) state ppid ...
    auto close_paren = line.rfind(')');
    if (close_paren == std::string::npos) continue;
    std::istringstream rest(line.substr(close_paren + 2));
    char state = 0;
    int ppid = 0;
    rest >> state >> ppid;
    if (ppid == self) out.push_back(std::stoi(name));
  }
  return out;
}

inline std::string random_bytes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::string bytes(n, '\0');
  for (auto& b : bytes) b = static_cast<char>(rng() & 0xff);
  return bytes;
}

inline RegistryEntry deploy_bundled(Platform& platform, const std::string& name,
                                    DriverKind driver = DriverKind::process, std::int64_t timeout_ms = kDefaultTimeoutMs) {
  FunctionSpec spec;
  spec.name = name;
  spec.image_ref = name;
  spec.driver = driver;
  spec.timeout_ms = timeout_ms;
  return platform.deploy(spec, std::string_view(read_file(function_path(name))));
}

inline RegistryEntry deploy_simulated(Platform& platform, const std::string& name, const std::string& profile,
                                      std::int64_t timeout_ms = kDefaultTimeoutMs) {
  FunctionSpec spec;
  spec.name = name;
  spec.image_ref = name;
  spec.driver = DriverKind::simulated;
  spec.profile_name = profile;
  spec.timeout_ms = timeout_ms;
  return platform.deploy(spec, std::nullopt);
}

// Fixed-latency profile for queueing arithmetic.
inline RuntimeProfile fixed_profile(const std::string& name, double ms, int cores = 24) {
  RuntimeProfile p;
  p.name = name;
  p.median_ms = ms;
  p.p99_ms = ms;
  p.cores = cores;
  return p;
}

}  // namespace coldfaas::testing
