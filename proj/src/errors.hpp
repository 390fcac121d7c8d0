#pragma once
#include <stdexcept>
#include <string>

namespace fanoshg {

// Error taxonomy shared by the whole toolkit. Codes align 1:1 with the
// fano_status values of the public C API.
enum class ErrorCode : int {
    Ok = 0,
    InvalidParam = 1,
    NonFinite = 2,            // state blew up during integration
    NoConvergence = 3,        // fixed-point iteration exhausted max_iter
    DegenerateDenominator = 4, // exact pole of the closed-form amplitude
    NotConverged = 5,          // operation requires a converged steady state
    NoBracket = 6,             // drive calibration bracket has no sign change
    BadInput = 7,              // malformed spec/config payload
    Io = 8,
    OracleFailure = 9,
};

struct FanoError : std::runtime_error {
    ErrorCode code;
    FanoError(ErrorCode c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

struct InvalidParamError : FanoError {
    std::string field;
    InvalidParamError(std::string f, const std::string& msg)
        : FanoError(ErrorCode::InvalidParam, msg), field(std::move(f)) {}
};

struct NonFiniteError : FanoError {
    double t_fail;                 // time of failure
    NonFiniteError(double t, const std::string& msg)
        : FanoError(ErrorCode::NonFinite, msg), t_fail(t) {}
};

struct DegenerateDenominatorError : FanoError {
    explicit DegenerateDenominatorError(const std::string& msg)
        : FanoError(ErrorCode::DegenerateDenominator, msg) {}
};

struct NotConvergedError : FanoError {
    explicit NotConvergedError(const std::string& msg)
        : FanoError(ErrorCode::NotConverged, msg) {}
};

struct NoBracketError : FanoError {
    explicit NoBracketError(const std::string& msg)
        : FanoError(ErrorCode::NoBracket, msg) {}
};

} // namespace fanoshg
