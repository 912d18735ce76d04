// Error hierarchy shared by every gplfm module.
#pragma once

#include <stdexcept>
#include <string>

namespace gplfm {

/// Base class for all library errors. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix or vector shapes that do not fit together.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Physically or mathematically invalid parameters (non-positive mass, bad dof index, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent configuration documents.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A kernel family / order with no shipped state-space realization.
class UnsupportedKernelError : public Error {
public:
    using Error::Error;
};

/// A steady state was requested for a system that is not asymptotically stable.
class StabilityError : public Error {
public:
    using Error::Error;
};

/// A matrix that must be inverted is numerically singular.
class ConditioningError : public Error {
public:
    ConditioningError(const std::string& what, long step = -1)
        : Error(step >= 0 ? what + " (step " + std::to_string(step) + ")" : what), step_(step) {}

    long step() const noexcept { return step_; }

private:
    long step_;
};

/// An estimator cannot work on the given model structure (e.g. DKF without feedthrough).
class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// Every start of a hyperparameter search failed.
class OptimizationError : public Error {
public:
    using Error::Error;
};

}  // namespace gplfm
