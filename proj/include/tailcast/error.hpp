#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tailcast {

enum class ErrorCode {
    parse,              // malformed input row or field
    structure,          // duplicate / non-monotone dates, inconsistent archive
    io,                 // unreadable file
    domain,             // argument outside its documented domain
    insufficient_data,  // too few usable values for the requested fit
    singular_fit,       // rank-deficient or ill-conditioned design
    nonstationary,      // |alpha| >= 1
    zero_variance,      // correlation / bandwidth undefined
    no_trials,          // no qualifying forecast days
    degenerate,         // single-class trial set
    undefined_skill,    // zero reference score
    quadrature,         // adaptive integration did not converge
};

const char* to_string(ErrorCode code) noexcept;

/// True for errors caused by the caller's input (CLI exit code 2);
/// false for numerical failures (exit code 3).
bool is_input_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(ErrorCode::parse, "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Carries the estimate reached when the subdivision limit was hit.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double estimate, double abs_error)
        : Error(ErrorCode::quadrature, what), estimate_(estimate), abs_error_(abs_error) {}
    double estimate() const noexcept { return estimate_; }
    double abs_error() const noexcept { return abs_error_; }

private:
    double estimate_;
    double abs_error_;
};

}  // namespace tailcast
