#pragma once

#include <stdexcept>
#include <string>

namespace pams {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An operation that needs at least one active antenna received an all-zero pattern.
struct ZeroActivation : Error {
    using Error::Error;
};

/// Argument outside the mathematical domain of a formula (z <= 0, zero denominator, ...).
struct DomainError : Error {
    using Error::Error;
};

/// The active-set loop or root bracketing failed to terminate within its caps.
struct NoConvergence : Error {
    using Error::Error;
};

/// Activation set inconsistent with the requested scheme configuration.
struct ConfigMismatch : Error {
    using Error::Error;
};

/// A NOMA view was requested for a solution with zero uplink time.
struct DegenerateUplink : Error {
    using Error::Error;
};

/// Exhaustive enumeration would exceed the evaluation budget.
struct BudgetExceeded : Error {
    using Error::Error;
};

/// Experiment configuration failed validation.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace pams
