#pragma once

#include <stdexcept>
#include <string>

namespace urbp {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A transition-matrix row does not sum to one (beyond tolerance).
struct RowSumError : Error {
    using Error::Error;
};

// A probability entry is negative.
struct NegativeEntryError : Error {
    using Error::Error;
};

// Chain is not ergodic (reducible or periodic), or a measured contraction
// certificate could not be established.
struct ErgodicityError : Error {
    using Error::Error;
};

// An iterative procedure did not converge within its iteration cap.
// Carries the last residual for diagnosis.
struct ConvergenceError : Error {
    double last_residual;
    ConvergenceError(const std::string& msg, double residual)
        : Error(msg), last_residual(residual) {}
};

// Numerical breakdown (singular system, invalid floating-point result).
struct NumericalError : Error {
    using Error::Error;
};

// Arguments outside the documented domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

// An observation has probability zero under the current belief/model.
struct ImpossibleObservationError : Error {
    using Error::Error;
};

// Requested belief grid exceeds the configured size cap.
struct GridTooLargeError : Error {
    using Error::Error;
};

// Requested exact oracle exceeds the configured node cap.
struct OracleTooLargeError : Error {
    using Error::Error;
};

// Malformed or inconsistent experiment configuration.
struct ConfigError : Error {
    using Error::Error;
};

// Curve fitting failed (too few points or degenerate design).
struct FitError : Error {
    using Error::Error;
};

// An operation that needs recorded data was called with none.
struct NoDataError : Error {
    using Error::Error;
};

}  // namespace urbp
