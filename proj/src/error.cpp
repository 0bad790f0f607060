#include "spinsense/error.hpp"

namespace spinsense {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonHermitianInput: return "NonHermitianInput";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::NonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::ZeroLinewidth: return "ZeroLinewidth";
    case ErrorCode::ZeroSpinLinewidth: return "ZeroSpinLinewidth";
    case ErrorCode::ZeroKappaTh: return "ZeroKappaTh";
    case ErrorCode::ZeroCoupling: return "ZeroCoupling";
    case ErrorCode::InvalidBounds: return "InvalidBounds";
    case ErrorCode::ZeroRate: return "ZeroRate";
    case ErrorCode::AllZeroBorder: return "AllZeroBorder";
    case ErrorCode::AsymmetricGrid: return "AsymmetricGrid";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::ZeroSlope: return "ZeroSlope";
    case ErrorCode::NegativeRadicand: return "NegativeRadicand";
    case ErrorCode::ZeroPower: return "ZeroPower";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::UndersampledTestTone: return "UndersampledTestTone";
    case ErrorCode::DegenerateAbscissa: return "DegenerateAbscissa";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::UnitMismatch: return "UnitMismatch";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace spinsense
