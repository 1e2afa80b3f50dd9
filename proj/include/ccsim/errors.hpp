#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ccsim {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad grid construction input (zero/negative counts or extents).
class invalid_domain_error : public error {
public:
    using error::error;
};

/// A field was used with a grid it does not belong to.
class dimension_error : public error {
public:
    using error::error;
};

/// A documented precondition was violated (negative coefficient, r < 0, ...).
class contract_violation_error : public error {
public:
    using error::error;
};

/// Linear solver did not reach the requested residual within maxit.
class solver_failure_error : public error {
public:
    solver_failure_error(const std::string& msg, int iterations, double residual)
        : error(msg), iterations(iterations), residual(residual) {}
    int iterations;
    double residual;
};

/// Picard iteration stagnated even after exhausting the step-halving budget.
class picard_divergence_error : public error {
public:
    picard_divergence_error(const std::string& msg, std::vector<double> trace)
        : error(msg), residuals(std::move(trace)) {}
    std::vector<double> residuals;
};

/// A state invariant (u >= 0, alpha <= z <= |z_prev|_inf) was breached
/// beyond the configured tolerance. Carries location and magnitude.
class bound_violation_error : public error {
public:
    bound_violation_error(const std::string& msg, int cell, double magnitude)
        : error(msg), cell(cell), magnitude(magnitude) {}
    int cell;
    double magnitude;
};

/// Configuration text could not be parsed or failed validation.
class config_error : public error {
public:
    using error::error;
};

/// A time-series evaluation outside the recorded range.
class time_range_error : public error {
public:
    using error::error;
};

} // namespace ccsim
