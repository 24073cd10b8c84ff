#pragma once

#include <stdexcept>
#include <string>

namespace angulus {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on the input was violated (bad domain data, point outside
/// the domain, non-positive multiplier, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An iterative procedure did not reach its tolerance. Carries the last
/// estimate of the quantity being computed and the residual it had.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_estimate, double residual)
        : Error(what), last_estimate_(last_estimate), residual_(residual) {}

    double last_estimate() const noexcept { return last_estimate_; }
    double residual() const noexcept { return residual_; }

private:
    double last_estimate_;
    double residual_;
};

} // namespace angulus
