#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coldfaas/driver.hpp"
#include "coldfaas/types.hpp"

namespace coldfaas {

inline constexpr std::string_view kDigestAlgorithm = "sha256";

struct RegistryEntry {
  FunctionSpec spec;
  std::optional<ProcessImage> image;
  std::string digest_algorithm{kDigestAlgorithm};
  std::int64_t deployed_at_unix_ms = 0;
  std::int64_t version = 0;
};

struct ImageSize {
  std::string name;
  std::uint64_t size_bytes = 0;
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_file_hex(const std::filesystem::path& path);

// Versioned on-disk function store:
//   <root>/<name>/<version>/image      executable, mode 0755
//   <root>/<name>/<version>/entry.json spec + image metadata
// A version directory is assembled under a staging name and renamed into
// place, so a reader only ever sees complete versions.
class Registry {
 public:
  explicit Registry(std::filesystem::path root);

  // Throws Error{invalid_spec | already_exists | io_error}.
  RegistryEntry put(const FunctionSpec& spec, std::optional<std::string_view> image_bytes,
                    bool overwrite = false);

  // Latest version with a re-verified image digest.
  // Throws Error{not_found | checksum_mismatch}.
  RegistryEntry resolve(std::string_view name) const;

  std::optional<RegistryEntry> find(std::string_view name) const;

  // Latest versions with an image, largest first.
  std::vector<ImageSize> report_sizes() const;

  std::vector<std::string> names() const;
  const std::filesystem::path& root() const { return root_; }

 private:
  using EntryPtr = std::shared_ptr<const RegistryEntry>;

  void load_existing();
  std::mutex& name_lock(const std::string& name);

  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::map<std::string, EntryPtr, std::less<>> latest_;
  std::map<std::string, std::unique_ptr<std::mutex>> put_locks_;
};

}  // namespace coldfaas
