#pragma once

#include <stdexcept>
#include <string>

namespace crossint {

/// Bad user-supplied input (dimension mismatch, non-finite data, ...).
struct InvalidInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure (singular pinned block, Cholesky of an indefinite matrix, ...).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotPositiveDefiniteError : NumericalError {
    using NumericalError::NumericalError;
};

/// Thrown when an adaptive method exhausts its subdivision budget.
/// Carries the best estimate obtained so far.
struct AccuracyError : NumericalError {
    AccuracyError(const std::string& msg, double best, double err_est)
        : NumericalError(msg), best_estimate(best), error_estimate(err_est) {}
    double best_estimate;
    double error_estimate;
};

} // namespace crossint
