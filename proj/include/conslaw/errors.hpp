#pragma once

#include <stdexcept>
#include <string>

namespace conslaw {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };
struct RangeError : Error { using Error::Error; };
struct ConvergenceError : Error { using Error::Error; };
struct StabilityError : Error { using Error::Error; };
struct TableRangeError : Error { using Error::Error; };
struct AccuracyError : Error { using Error::Error; };

// Raised when a configuration document is missing a field or has a bad value.
struct ConfigError : Error {
    ConfigError(std::string field, const std::string& what)
        : Error("config field '" + field + "': " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// The maximiser of a variational problem sat at the edge of the sampled domain.
struct TruncationError : Error {
    TruncationError(double x, const std::string& what) : Error(what), x_(x) {}
    double x() const noexcept { return x_; }

private:
    double x_;
};

}  // namespace conslaw
