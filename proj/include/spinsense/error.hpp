#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spinsense {

enum class ErrorCode {
  InvalidArgument,
  NonHermitianInput,
  IndexOutOfRange,
  EmptyRange,
  NonPositiveTemperature,
  ZeroLinewidth,
  ZeroSpinLinewidth,
  ZeroKappaTh,
  ZeroCoupling,
  InvalidBounds,
  ZeroRate,
  AllZeroBorder,
  AsymmetricGrid,
  GridMismatch,
  TooFewPoints,
  TooFewSamples,
  ZeroSignal,
  ZeroSlope,
  NegativeRadicand,
  ZeroPower,
  EmptyTable,
  UndersampledTestTone,
  DegenerateAbscissa,
  ParseError,
  UnknownKey,
  UnitMismatch,
  IoError,
};

/// Stable machine-readable name, used on stderr by the CLI.
std::string_view error_code_name(ErrorCode code) noexcept;

/// All library failures are reported through this exception type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace spinsense
