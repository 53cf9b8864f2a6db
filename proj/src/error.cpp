#include "tailcast/error.hpp"

namespace tailcast {

const char* to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::parse: return "parse";
    case ErrorCode::structure: return "structure";
    case ErrorCode::io: return "io";
    case ErrorCode::domain: return "domain";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::singular_fit: return "singular_fit";
    case ErrorCode::nonstationary: return "nonstationary";
    case ErrorCode::zero_variance: return "zero_variance";
    case ErrorCode::no_trials: return "no_trials";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::undefined_skill: return "undefined_skill";
    case ErrorCode::quadrature: return "quadrature";
    }
    return "unknown";
}

bool is_input_error(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::parse:
    case ErrorCode::structure:
    case ErrorCode::io:
    case ErrorCode::domain:
    case ErrorCode::insufficient_data:
    case ErrorCode::no_trials:
        return true;
    default:
        return false;
    }
}

}  // namespace tailcast
