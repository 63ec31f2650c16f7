#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oneside {

/// Failure categories raised by the library.
enum class ErrorCode {
  InvalidSpec,
  InvalidArgument,
  QuadratureFailure,
  BracketFailure,
  Overflow,
  IndexOutOfRange,
  AliasingWarning,
  UnsupportedCombination,
  SingularSystem,
  IllConditioned,
  InvalidRateMatrix,
  NotIrreducible,
  NoAbsorbingState,
  InvalidPath,
  NotGridPath,
  StartBelowBarrier,
  EmptyRegion,
  HorizonMismatch,
  TailUnreachable,
  SeriesNotConverged,
  RangeExceeded,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace oneside
