#include "coldfaas/registry.hpp"

#include <openssl/evp.h>
#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <random>

#include "coldfaas/error.hpp"
#include "coldfaas/json.hpp"

namespace fs = std::filesystem;

namespace coldfaas {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorCode::io_error, "sha256 init failed");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t size) { EVP_DigestUpdate(ctx_, data, size); }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, digest.data(), &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[digest[i] >> 4]);
      out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

nlohmann::json entry_to_json(const RegistryEntry& entry) {
  nlohmann::json j{{"spec", entry.spec},
                   {"digest_algorithm", entry.digest_algorithm},
                   {"deployed_at_unix_ms", entry.deployed_at_unix_ms},
                   {"version", entry.version}};
  if (entry.image) {
    j["image"] = {{"checksum", entry.image->checksum}, {"size_bytes", entry.image->size_bytes}};
  }
  return j;
}

RegistryEntry entry_from_json(const nlohmann::json& j, const fs::path& version_dir) {
  RegistryEntry entry;
  entry.spec = j.at("spec").get<FunctionSpec>();
  entry.digest_algorithm = j.value("digest_algorithm", std::string(kDigestAlgorithm));
  entry.deployed_at_unix_ms = j.value("deployed_at_unix_ms", std::int64_t{0});
  entry.version = j.at("version").get<std::int64_t>();
  if (auto it = j.find("image"); it != j.end()) {
    ProcessImage image;
    image.executable_path = version_dir / "image";
    image.checksum = it->at("checksum").get<std::string>();
    image.size_bytes = it->at("size_bytes").get<std::uint64_t>();
    entry.image = std::move(image);
  }
  return entry;
}

// O_CLOEXEC keeps concurrently spawned children from inheriting a writable
// descriptor, which would make exec of the image fail with ETXTBSY.
void write_file_synced(const fs::path& path, std::string_view bytes) {
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::io_error, "cannot create " + path.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < bytes.size()) {
    ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      int err = errno;
      ::close(fd);
      throw Error(ErrorCode::io_error, "write failed for " + path.string() + ": " + std::strerror(err));
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

std::string staging_suffix() {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  return std::to_string(::getpid()) + "-" + std::to_string(rng());
}

std::optional<std::int64_t> parse_version(const std::string& text) {
  if (text.empty() || text.size() > 18) return std::nullopt;
  std::int64_t v = 0;
  for (char c : text) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file_hex(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  Sha256 h;
  std::array<char, 65536> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

Registry::Registry(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create registry dir " + root_.string() + ": " + ec.message());
  load_existing();
}

void Registry::load_existing() {
  for (const auto& fn_dir : fs::directory_iterator(root_)) {
    if (!fn_dir.is_directory()) continue;
    auto name = fn_dir.path().filename().string();
    if (!is_valid_function_name(name)) continue;
    EntryPtr best;
    for (const auto& version_dir : fs::directory_iterator(fn_dir.path())) {
      auto version = parse_version(version_dir.path().filename().string());
      if (!version || !fs::exists(version_dir.path() / "entry.json")) continue;
      if (best && best->version >= *version) continue;
      std::ifstream in(version_dir.path() / "entry.json");
      try {
        auto entry = entry_from_json(nlohmann::json::parse(in), version_dir.path());
        best = std::make_shared<const RegistryEntry>(std::move(entry));
      } catch (const std::exception&) {
        continue;
      }
    }
    if (best) latest_[name] = std::move(best);
  }
}

std::mutex& Registry::name_lock(const std::string& name) {
  std::lock_guard lock(mu_);
  auto& slot = put_locks_[name];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

RegistryEntry Registry::put(const FunctionSpec& spec_in, std::optional<std::string_view> image_bytes,
                            bool overwrite) {
  FunctionSpec spec = spec_in;
  if (spec.image_ref.empty()) spec.image_ref = spec.name;
  validate(spec);
  if (spec.driver == DriverKind::process && !image_bytes) {
    throw Error(ErrorCode::invalid_spec, "process driver requires an image");
  }
  if (spec.driver == DriverKind::simulated && image_bytes) {
    throw Error(ErrorCode::invalid_spec, "simulated driver takes no image");
  }

  std::lock_guard put_lock(name_lock(spec.name));
  std::int64_t version = 1;
  if (auto current = find(spec.name)) {
    if (!overwrite) throw Error(ErrorCode::already_exists, "function '" + spec.name + "' already deployed");
    version = current->version + 1;
  }

  const fs::path fn_dir = root_ / spec.name;
  const fs::path staging = fn_dir / (".staging-" + staging_suffix());
  const fs::path final_dir = fn_dir / std::to_string(version);
  std::error_code ec;
  fs::create_directories(staging, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + staging.string() + ": " + ec.message());

  RegistryEntry entry;
  entry.spec = spec;
  entry.version = version;
  entry.deployed_at_unix_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::system_clock::now().time_since_epoch())
                                  .count();
  try {
    if (image_bytes) {
      write_file_synced(staging / "image", *image_bytes);
      fs::permissions(staging / "image",
                      fs::perms::owner_all | fs::perms::group_read | fs::perms::group_exec |
                          fs::perms::others_read | fs::perms::others_exec);
      entry.image = ProcessImage{final_dir / "image", sha256_hex(*image_bytes), image_bytes->size()};
    }
    write_file_synced(staging / "entry.json", entry_to_json(entry).dump(2));
    fs::rename(staging, final_dir);
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(staging, ec);
    throw Error(ErrorCode::io_error, e.what());
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }

  auto committed = std::make_shared<const RegistryEntry>(entry);
  std::lock_guard lock(mu_);
  latest_[spec.name] = std::move(committed);
  return entry;
}

std::optional<RegistryEntry> Registry::find(std::string_view name) const {
  std::lock_guard lock(mu_);
  auto it = latest_.find(name);
  if (it == latest_.end()) return std::nullopt;
  return *it->second;
}

RegistryEntry Registry::resolve(std::string_view name) const {
  auto entry = find(name);
  if (!entry) throw Error(ErrorCode::not_found, "function '" + std::string(name) + "' not deployed");
  if (entry->image) {
    std::string actual;
    try {
      actual = sha256_file_hex(entry->image->executable_path);
    } catch (const Error&) {
      throw Error(ErrorCode::checksum_mismatch, "image for '" + std::string(name) + "' is unreadable");
    }
    if (actual != entry->image->checksum) {
      throw Error(ErrorCode::checksum_mismatch, "image for '" + std::string(name) + "' does not match its digest");
    }
  }
  return *entry;
}

std::vector<ImageSize> Registry::report_sizes() const {
  std::vector<ImageSize> out;
  {
    std::lock_guard lock(mu_);
    for (const auto& [name, entry] : latest_) {
      if (entry->image) out.push_back({name, entry->image->size_bytes});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ImageSize& a, const ImageSize& b) {
    return a.size_bytes > b.size_bytes;
  });
  return out;
}

std::vector<std::string> Registry::names() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [name, _] : latest_) out.push_back(name);
  return out;
}

}  // namespace coldfaas
