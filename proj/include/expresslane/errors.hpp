#ifndef EXPRESSLANE_ERRORS_HPP
#define EXPRESSLANE_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace expresslane {

enum class ErrorCode {
    CycleDetected,
    UnreachableEdge,
    MultipleOrigins,
    NonIncreasingLatency,
    InvalidLatency,
    NegativeFlow,
    NoPath,
    InvalidHorizon,
    InvalidPolicy,
    InvalidGroup,
    TimeVaryingEligibleVot,
    NotConverged,
    InfeasibleFlow,
    NotBracketed,
    AssumptionViolated,
    NoInteriorCrossing,
    UnknownCase,
    InvalidArgument,
    ParseError,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code is
/// stable and is what callers (and the CLI exit-status mapping) switch on.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

struct Violation {
    ErrorCode code;
    std::string detail;
};

/// Raised by validate() with every violation found, not only the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations);

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

}  // namespace expresslane

#endif
