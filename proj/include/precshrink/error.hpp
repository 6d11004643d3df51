#pragma once

#include <stdexcept>
#include <string>

namespace precshrink {

enum class ErrorCode {
  invalid_input,         // malformed arguments or violated preconditions
  regime_mismatch,       // operation requires the other side of p/n = 1
  near_singular_regime,  // p/n inside the rejected band below 1
  singular_matrix,
  degenerate_target,     // target numerically proportional to the sample inverse
  non_convergence,
  inconsistent_input,
  undefined_prial,
  parse_error,
};

const char* to_string(ErrorCode code) noexcept;

/// Numeric failures map to CLI exit code 3, everything else to 2.
bool is_numeric_failure(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace precshrink
