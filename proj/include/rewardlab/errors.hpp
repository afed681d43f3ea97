#pragma once

#include <stdexcept>
#include <string>

namespace rewardlab {

/// Machine-readable failure categories surfaced by the library.
enum class ErrorCode {
    NonStochasticRow,
    BadInitialDistribution,
    UnreachableState,
    BadGamma,
    ShapeMismatch,
    SolveFailure,
    NonConvergence,
    ZeroSupport,
    UnsupportedNorm,
    SkipNotANorm,
    InstanceTooLarge,
    DegenerateWeights,
    ZeroCanon,
    UnknownCanon,
    UnknownNorm,
    UnknownDist,
    ForbiddenCombination,
    UnknownSpec,
    LpInfeasible,
    BadEpsilon,
    NotDeterministicTau,
    ZeroVariance,
    LengthMismatch,
    BadConfig,
    IoError,
};

const char* error_code_name(ErrorCode code);

/// All library failures are reported through this exception type.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

} // namespace rewardlab
