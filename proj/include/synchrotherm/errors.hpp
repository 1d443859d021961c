// errors.hpp — exception types shared across the library

#pragma once

#include <stdexcept>
#include <string>

namespace synchrotherm {

// Invalid input: bad matrix shape, malformed config, unnormalized state.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Requested Fock levels lie outside the certified truncation.
class TruncationError : public std::runtime_error {
public:
    explicit TruncationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: residual bound violated, solver breakdown.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Time integration could not reach the requested time.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double achieved_time)
        : std::runtime_error(what), achieved_time_(achieved_time) {}

    double achieved_time() const noexcept { return achieved_time_; }

private:
    double achieved_time_;
};

}  // namespace synchrotherm
