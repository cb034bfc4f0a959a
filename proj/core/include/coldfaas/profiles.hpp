#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coldfaas/types.hpp"

namespace coldfaas {

class ProfileTable {
 public:
  ProfileTable() = default;
  explicit ProfileTable(std::vector<RuntimeProfile> profiles);

  // Replaces any profile with the same name. Throws Error{invalid_profile}.
  void add(RuntimeProfile profile);

  const RuntimeProfile* find(const std::string& name) const;
  const RuntimeProfile& at(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name) != nullptr; }

  std::vector<RuntimeProfile> list() const;
  std::size_t size() const { return profiles_.size(); }

 private:
  std::map<std::string, RuntimeProfile> profiles_;
};

// Built-in table: process, python, includeos-hvt, solo5-spt, runc-direct,
// gvisor, kata, firecracker, docker-cli, fn-docker-cold, fn-includeos-cold,
// lambda-cold, lambda-warm.
ProfileTable default_profiles();

// JSON array of profile objects.
ProfileTable load_profiles(const std::filesystem::path& path);
void save_profiles(const ProfileTable& table, const std::filesystem::path& path);

}  // namespace coldfaas
