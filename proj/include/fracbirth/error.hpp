#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracbirth {

enum class ErrorCode {
  DomainError,
  NonConvergence,
  IndexOutOfRange,
  DuplicateRates,
  NonPositiveRate,
  DegenerateRates,
  NumericalBreakdown,
  TruncationFailure,
  QuadratureFailure,
  PrefixExhausted,
  ExplosionGuard,
  DegenerateBinning,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DuplicateRates: return "DuplicateRates";
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::DegenerateRates: return "DegenerateRates";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::TruncationFailure: return "TruncationFailure";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::PrefixExhausted: return "PrefixExhausted";
    case ErrorCode::ExplosionGuard: return "ExplosionGuard";
    case ErrorCode::DegenerateBinning: return "DegenerateBinning";
  }
  return "Unknown";
}

/// Validation-type failures (bad input) as opposed to numerical ones.
constexpr bool is_validation_error(ErrorCode code) {
  return code == ErrorCode::DomainError || code == ErrorCode::IndexOutOfRange ||
         code == ErrorCode::DuplicateRates || code == ErrorCode::NonPositiveRate;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace fracbirth
