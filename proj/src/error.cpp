// SPDX-License-Identifier: Apache-2.0
#include "atomdemix/error.hpp"

namespace atomdemix {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonHermitianInput: return "NonHermitianInput";
        case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::OutOfRangeTau: return "OutOfRangeTau";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::InfeasibleSeparation: return "InfeasibleSeparation";
        case ErrorCode::NoPeaksFound: return "NoPeaksFound";
        case ErrorCode::DegenerateM: return "DegenerateM";
        case ErrorCode::DuplicateSupport: return "DuplicateSupport";
        case ErrorCode::SingularFisher: return "SingularFisher";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace atomdemix
