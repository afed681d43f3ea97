#include "rewardlab/errors.hpp"

namespace rewardlab {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonStochasticRow: return "NonStochasticRow";
        case ErrorCode::BadInitialDistribution: return "BadInitialDistribution";
        case ErrorCode::UnreachableState: return "UnreachableState";
        case ErrorCode::BadGamma: return "BadGamma";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::SolveFailure: return "SolveFailure";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::ZeroSupport: return "ZeroSupport";
        case ErrorCode::UnsupportedNorm: return "UnsupportedNorm";
        case ErrorCode::SkipNotANorm: return "SkipNotANorm";
        case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
        case ErrorCode::DegenerateWeights: return "DegenerateWeights";
        case ErrorCode::ZeroCanon: return "ZeroCanon";
        case ErrorCode::UnknownCanon: return "UnknownCanon";
        case ErrorCode::UnknownNorm: return "UnknownNorm";
        case ErrorCode::UnknownDist: return "UnknownDist";
        case ErrorCode::ForbiddenCombination: return "ForbiddenCombination";
        case ErrorCode::UnknownSpec: return "UnknownSpec";
        case ErrorCode::LpInfeasible: return "LpInfeasible";
        case ErrorCode::BadEpsilon: return "BadEpsilon";
        case ErrorCode::NotDeterministicTau: return "NotDeterministicTau";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::BadConfig: return "BadConfig";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

} // namespace rewardlab
