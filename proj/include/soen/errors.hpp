#pragma once

#include <stdexcept>
#include <string>

namespace soen {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file (bad header, wrong counts, non-monotone grid).
struct ParseError : Error {
    using Error::Error;
};

/// A structural invariant of a domain type does not hold.
struct InvariantViolation : Error {
    using Error::Error;
};

/// Source-function bias query outside the tabulated hull.
struct BiasOutOfRange : Error {
    using Error::Error;
};

/// Integration produced NaN or infinity (step size too large).
struct NonFiniteState : Error {
    using Error::Error;
};

/// A rate measurement did not converge within its budget.
struct NoSteadyState : Error {
    using Error::Error;
};

/// Fixed-point iteration exhausted its iteration budget.
struct NoConvergence : Error {
    using Error::Error;
};

/// chi-squared requested against an identically-zero reference trace.
struct ZeroReference : Error {
    using Error::Error;
};

/// Traces compared on different time grids.
struct GridMismatch : Error {
    using Error::Error;
};

/// Config file is well formed but semantically invalid.
struct ValidationError : Error {
    using Error::Error;
};

}  // namespace soen
