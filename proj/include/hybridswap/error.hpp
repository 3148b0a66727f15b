#pragma once

#include <stdexcept>
#include <string>

namespace hybridswap {

enum class ErrorCode {
  invalid_argument,
  label,
  truncation,
  numerical,
  config,
  io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::label: return "label";
    case ErrorCode::truncation: return "truncation";
    case ErrorCode::numerical: return "numerical";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

// All library failures surface as this type; the code lets callers (and the
// CLI exit-code mapping) tell configuration mistakes from numerical trouble.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hybridswap
