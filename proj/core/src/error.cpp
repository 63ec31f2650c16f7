#include "oneside/error.hpp"

namespace oneside {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidSpec: return "invalid-spec";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::QuadratureFailure: return "quadrature-failure";
    case ErrorCode::BracketFailure: return "bracket-failure";
    case ErrorCode::Overflow: return "overflow";
    case ErrorCode::IndexOutOfRange: return "index-out-of-range";
    case ErrorCode::AliasingWarning: return "aliasing-warning";
    case ErrorCode::UnsupportedCombination: return "unsupported-combination";
    case ErrorCode::SingularSystem: return "singular-system";
    case ErrorCode::IllConditioned: return "ill-conditioned";
    case ErrorCode::InvalidRateMatrix: return "invalid-rate-matrix";
    case ErrorCode::NotIrreducible: return "not-irreducible";
    case ErrorCode::NoAbsorbingState: return "no-absorbing-state";
    case ErrorCode::InvalidPath: return "invalid-path";
    case ErrorCode::NotGridPath: return "not-grid-path";
    case ErrorCode::StartBelowBarrier: return "start-below-barrier";
    case ErrorCode::EmptyRegion: return "empty-region";
    case ErrorCode::HorizonMismatch: return "horizon-mismatch";
    case ErrorCode::TailUnreachable: return "tail-unreachable";
    case ErrorCode::SeriesNotConverged: return "series-not-converged";
    case ErrorCode::RangeExceeded: return "range-exceeded";
    case ErrorCode::ConfigError: return "config-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace oneside
