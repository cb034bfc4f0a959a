#include "coldfaas/types.hpp"

#include <array>
#include <cmath>

#include "coldfaas/error.hpp"

namespace coldfaas {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_spec: return "invalid_spec";
    case ErrorCode::invalid_profile: return "invalid_profile";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::already_exists: return "already_exists";
    case ErrorCode::checksum_mismatch: return "checksum_mismatch";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::spawn_failure: return "spawn_failure";
    case ErrorCode::empty_samples: return "empty_samples";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::unreachable: return "unreachable";
  }
  return "unknown";
}

std::string_view to_string(DriverKind kind) {
  switch (kind) {
    case DriverKind::process: return "process";
    case DriverKind::simulated: return "simulated";
    case DriverKind::warmpool: return "warmpool";
  }
  return "unknown";
}

std::optional<DriverKind> parse_driver_kind(std::string_view text) {
  if (text == "process") return DriverKind::process;
  if (text == "simulated") return DriverKind::simulated;
  if (text == "warmpool") return DriverKind::warmpool;
  return std::nullopt;
}

bool is_valid_function_name(std::string_view name) {
  if (name.empty() || name.size() > 64) return false;
  for (char c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

void validate(const FunctionSpec& spec) {
  if (!is_valid_function_name(spec.name)) {
    throw Error(ErrorCode::invalid_spec, "name '" + spec.name + "' must match [a-z0-9_-]{1,64}");
  }
  if (spec.timeout_ms < 1) {
    throw Error(ErrorCode::invalid_spec, "timeout_ms must be >= 1");
  }
  if (spec.memory_mb < 1) {
    throw Error(ErrorCode::invalid_spec, "memory_mb must be >= 1");
  }
  bool simulated = spec.driver == DriverKind::simulated;
  if (simulated && !spec.profile_name) {
    throw Error(ErrorCode::invalid_spec, "simulated driver requires profile_name");
  }
  if (!simulated && spec.profile_name) {
    throw Error(ErrorCode::invalid_spec, "profile_name is only valid with the simulated driver");
  }
  if (spec.profile_name && spec.profile_name->empty()) {
    throw Error(ErrorCode::invalid_spec, "profile_name must not be empty");
  }
}

namespace {

constexpr std::array<std::string_view, kOutcomeCount> kOutcomeNames = {
    "ok",           "function_error", "timeout",           "rejected",        "not_found",
    "image_missing", "spawn_failure", "payload_too_large", "transport_error",
};

}  // namespace

std::string_view to_string(Outcome outcome) { return kOutcomeNames.at(static_cast<std::size_t>(outcome)); }

std::optional<Outcome> parse_outcome(std::string_view text) {
  for (std::size_t i = 0; i < kOutcomeNames.size(); ++i) {
    if (kOutcomeNames[i] == text) return static_cast<Outcome>(i);
  }
  return std::nullopt;
}

void validate(const RuntimeProfile& profile) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::invalid_profile, "profile '" + profile.name + "': " + what);
  };
  if (profile.name.empty()) fail("name must not be empty");
  if (!(profile.median_ms > 0.0) || !std::isfinite(profile.median_ms)) fail("median_ms must be positive");
  if (!(profile.p99_ms >= profile.median_ms) || !std::isfinite(profile.p99_ms)) fail("p99_ms must be >= median_ms");
  if (profile.cores < 1) fail("cores must be >= 1");
  if (!(profile.contention_exponent >= 0.0)) fail("contention_exponent must be >= 0");
  if (!(profile.fixed_overhead_ms >= 0.0)) fail("fixed_overhead_ms must be >= 0");
}

}  // namespace coldfaas
