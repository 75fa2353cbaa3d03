#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace projot {

enum class ErrorCode {
    EmptySupport,
    NegativeWeight,
    WeightSumOutOfRange,
    DimensionMismatch,
    NonFiniteValue,
    InvalidOrder,
    InvalidSpec,
    ArgumentOutOfRange,
    InvalidDimension,
    UnsupportedDimension,
    ProblemTooLarge,
    SolverFailure,
    BudgetExceeded,
    ParseError,
};

inline std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::WeightSumOutOfRange: return "WeightSumOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ArgumentOutOfRange: return "ArgumentOutOfRange";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::ProblemTooLarge: return "ProblemTooLarge";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {

inline void require_order(double p)
{
    if (!(p >= 1.0) || !(p < 1e300))
        throw Error(ErrorCode::InvalidOrder, "order p must be a finite real >= 1");
}

} // namespace detail
} // namespace projot
