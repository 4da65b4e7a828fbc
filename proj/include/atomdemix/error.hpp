// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace atomdemix {

enum class ErrorCode {
    NonHermitianInput,
    ConvergenceFailure,
    SingularSystem,
    RankDeficient,
    OutOfRangeTau,
    LengthMismatch,
    InfeasibleSeparation,
    NoPeaksFound,
    DegenerateM,
    DuplicateSupport,
    SingularFisher,
    InvalidArgument,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Thrown by solve_linear / solve_certificate; keeps the pivot-ratio estimate.
class SingularSystemError : public Error {
public:
    SingularSystemError(const std::string& what, double condition_estimate)
        : Error(ErrorCode::SingularSystem, what), condition_estimate_(condition_estimate) {}

    double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

}  // namespace atomdemix
