#include "coldfaas/profiles.hpp"

#include <fstream>

#include "coldfaas/error.hpp"
#include "coldfaas/json.hpp"

namespace coldfaas {

ProfileTable::ProfileTable(std::vector<RuntimeProfile> profiles) {
  for (auto& p : profiles) add(std::move(p));
}

void ProfileTable::add(RuntimeProfile profile) {
  validate(profile);
  auto name = profile.name;
  profiles_.insert_or_assign(std::move(name), std::move(profile));
}

const RuntimeProfile* ProfileTable::find(const std::string& name) const {
  auto it = profiles_.find(name);
  return it == profiles_.end() ? nullptr : &it->second;
}

const RuntimeProfile& ProfileTable::at(const std::string& name) const {
  const auto* p = find(name);
  if (p == nullptr) throw Error(ErrorCode::not_found, "unknown runtime profile '" + name + "'");
  return *p;
}

std::vector<RuntimeProfile> ProfileTable::list() const {
  std::vector<RuntimeProfile> out;
  out.reserve(profiles_.size());
  for (const auto& [_, p] : profiles_) out.push_back(p);
  return out;
}

namespace {

RuntimeProfile make(std::string name, double median, double p99, std::string source, double fixed = 0.0) {
  RuntimeProfile p;
  p.name = std::move(name);
  p.median_ms = median;
  p.p99_ms = p99;
  p.cores = 24;
  p.contention_exponent = 1.0;
  p.fixed_overhead_ms = fixed;
  p.source = std::move(source);
  return p;
}

}  // namespace

// Medians marked "measured" are published numbers; p99 values without a
// published whisker are 1.5x the median, or the top of the published range.
ProfileTable default_profiles() {
  return ProfileTable({
      make("process", 1.0, 2.5, "compiled process spawn; fastest option measured; values approximate"),
      make("python", 20.0, 35.0,
           "python interpreter start, values approximate; fixed 80 ms measured overhead of loading scipy", 80.0),
      make("includeos-hvt", 10.0, 15.0,
           "IncludeOS on solo5 hvt: measured 8-15 ms under moderate load; median mid-band, p99 = range top"),
      make("solo5-spt", 1.2, 3.0, "solo5 spt test application: measured almost the same as processes; approximate"),
      make("runc-direct", 150.0, 200.0, "runc started directly with exported Alpine rootfs: measured ~150 ms"),
      make("gvisor", 120.0, 180.0, "gVisor OCI runtime: measured faster than runc; values approximate"),
      make("kata", 2200.0, 3300.0,
           "Kata Containers under overload: measured median 2.2 s, p99 3.3 s (calibrated at in_flight == cores)"),
      make("firecracker", 180.0, 260.0, "Firecracker microVM: measured comparable to OCI runtimes; approximate"),
      make("docker-cli", 650.0, 900.0, "Alpine container via docker CLI, interactive: measured ~650 ms"),
      make("fn-docker-cold", 288.3, 432.45, "Fn Docker cold start median 288.3 ms (AWS Stockholm)"),
      make("fn-includeos-cold", 33.4, 50.1, "Fn IncludeOS cold start median 33.4 ms (AWS Stockholm)"),
      make("lambda-cold", 449.7, 674.55, "AWS Lambda cold start median 449.7 ms (Stockholm)"),
      make("lambda-warm", 78.0, 117.0, "AWS Lambda warm start median 78.0 ms (Stockholm)"),
  });
}

ProfileTable load_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open profiles file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_profile, path.string() + ": " + e.what());
  }
  const auto& items = doc.is_object() && doc.contains("profiles") ? doc.at("profiles") : doc;
  if (!items.is_array()) throw Error(ErrorCode::invalid_profile, path.string() + ": expected an array of profiles");
  ProfileTable table;
  for (const auto& item : items) table.add(item.get<RuntimeProfile>());
  return table;
}

void save_profiles(const ProfileTable& table, const std::filesystem::path& path) {
  nlohmann::json doc = table.list();
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace coldfaas
