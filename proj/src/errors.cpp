#include "expresslane/errors.hpp"

namespace expresslane {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::UnreachableEdge: return "UnreachableEdge";
    case ErrorCode::MultipleOrigins: return "MultipleOrigins";
    case ErrorCode::NonIncreasingLatency: return "NonIncreasingLatency";
    case ErrorCode::InvalidLatency: return "InvalidLatency";
    case ErrorCode::NegativeFlow: return "NegativeFlow";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::InvalidHorizon: return "InvalidHorizon";
    case ErrorCode::InvalidPolicy: return "InvalidPolicy";
    case ErrorCode::InvalidGroup: return "InvalidGroup";
    case ErrorCode::TimeVaryingEligibleVot: return "TimeVaryingEligibleVot";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::InfeasibleFlow: return "InfeasibleFlow";
    case ErrorCode::NotBracketed: return "NotBracketed";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::NoInteriorCrossing: return "NoInteriorCrossing";
    case ErrorCode::UnknownCase: return "UnknownCase";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
{
}

namespace {

std::string summarize(const std::vector<Violation>& violations)
{
    std::string out = std::to_string(violations.size()) + " violation(s)";
    for (const auto& v : violations) {
        out += "; ";
        out += to_string(v.code);
        out += " (" + v.detail + ")";
    }
    return out;
}

ErrorCode first_code(const std::vector<Violation>& violations)
{
    return violations.empty() ? ErrorCode::InvalidArgument : violations.front().code;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(first_code(violations), summarize(violations)), violations_(std::move(violations))
{
}

}  // namespace expresslane
