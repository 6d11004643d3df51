#include "precshrink/error.hpp"

namespace precshrink {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid input";
    case ErrorCode::regime_mismatch: return "regime mismatch";
    case ErrorCode::near_singular_regime: return "near-singular regime";
    case ErrorCode::singular_matrix: return "singular matrix";
    case ErrorCode::degenerate_target: return "degenerate target";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::inconsistent_input: return "inconsistent input";
    case ErrorCode::undefined_prial: return "undefined PRIAL";
    case ErrorCode::parse_error: return "parse error";
  }
  return "unknown error";
}

bool is_numeric_failure(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::singular_matrix:
    case ErrorCode::degenerate_target:
    case ErrorCode::non_convergence:
    case ErrorCode::inconsistent_input:
    case ErrorCode::undefined_prial:
      return true;
    default:
      return false;
  }
}

}  // namespace precshrink
