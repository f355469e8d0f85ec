#pragma once

#include <stdexcept>
#include <string>

namespace leelab {

enum class ErrorCode {
  invalid_argument = 1,
  domain_violation,
  ceiling_exceeded,
  no_convergence,
  no_sign_change,
  singular,
  config_error,
  io_error,
  assertion_failed,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::invalid_argument, what);
}

}  // namespace leelab
