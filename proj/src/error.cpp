#include "leelab/error.hpp"

namespace leelab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::domain_violation: return "domain_violation";
    case ErrorCode::ceiling_exceeded: return "ceiling_exceeded";
    case ErrorCode::no_convergence: return "no_convergence";
    case ErrorCode::no_sign_change: return "no_sign_change";
    case ErrorCode::singular: return "singular";
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::assertion_failed: return "assertion_failed";
  }
  return "unknown";
}

}  // namespace leelab
