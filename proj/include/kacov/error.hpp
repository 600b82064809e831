#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kacov {

enum class ErrorCode {
  DegenerateBandwidth,
  NotSPD,
  KindMismatch,
  NumericalDomain,
  InvalidKernel,
  SampleTooSmall,
  OracleTooLarge,
  DegenerateMarginal,
  NonPositiveMoment,
  NonConvergence,
  InvalidSpec,
  InputError,
};

// Input-class errors are the caller's fault (bad flags, files, shapes);
// everything else is a numerical failure on otherwise valid input.
enum class ErrorClass { Input, Numeric };

std::string_view error_code_name(ErrorCode code);
ErrorClass error_class(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Returns a copy whose message is prefixed with `context: `.
  Error with_context(std::string_view context) const {
    return Error(code_, std::string(context) + ": " + what());
  }

private:
  ErrorCode code_;
};

}  // namespace kacov
