#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coldfaas {

enum class ErrorCode {
  invalid_spec,
  invalid_profile,
  not_found,
  already_exists,
  checksum_mismatch,
  io_error,
  spawn_failure,
  empty_samples,
  invalid_argument,
  unreachable,
};

std::string_view to_string(ErrorCode code);

// Configuration, registry and harness failures. Per-invocation failures are
// reported through Outcome instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace coldfaas
