#pragma once

#include <stdexcept>
#include <string>

namespace eulign {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
struct PreconditionError : Error {
    using Error::Error;
};

/// Input outside the mathematical domain of an operation (r <= 0, etc.).
struct DomainError : Error {
    using Error::Error;
};

/// Scenario configuration is invalid or incomplete.
struct ConfigError : Error {
    using Error::Error;
};

/// An iterative solver failed to reach its tolerance.
struct SolverError : Error {
    using Error::Error;
};

/// Time step too large for the current state (CFL, reflection cap).
struct StepSizeError : Error {
    using Error::Error;
};

/// Two particles closer than the singularity guard.
struct SingularityError : Error {
    using Error::Error;
};

/// Mismatched grids, field shapes or sampling between arguments.
struct ArgumentError : Error {
    using Error::Error;
};

} // namespace eulign
