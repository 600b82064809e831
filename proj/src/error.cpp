#include "kacov/error.hpp"

namespace kacov {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateBandwidth: return "degenerate bandwidth";
    case ErrorCode::NotSPD: return "not spd";
    case ErrorCode::KindMismatch: return "kind mismatch";
    case ErrorCode::NumericalDomain: return "numerical domain";
    case ErrorCode::InvalidKernel: return "invalid kernel";
    case ErrorCode::SampleTooSmall: return "sample too small";
    case ErrorCode::OracleTooLarge: return "oracle too large";
    case ErrorCode::DegenerateMarginal: return "degenerate marginal";
    case ErrorCode::NonPositiveMoment: return "non-positive moment";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::InvalidSpec: return "invalid spec";
    case ErrorCode::InputError: return "input error";
  }
  return "unknown";
}

ErrorClass error_class(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSPD:
    case ErrorCode::KindMismatch:
    case ErrorCode::SampleTooSmall:
    case ErrorCode::OracleTooLarge:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InputError:
      return ErrorClass::Input;
    default:
      return ErrorClass::Numeric;
  }
}

}  // namespace kacov
