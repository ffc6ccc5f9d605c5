#pragma once

#include <stdexcept>
#include <string>

namespace reach {

/// Base class for every error raised by the library.
class ReachError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public ReachError {
public:
    using ReachError::ReachError;
};

/// The geometric tail bound of the exponential series does not converge
/// for the requested (A, dt, eta): ||A||_inf * dt / (eta + 2) >= 1.
class NotConvergent : public ReachError {
public:
    using ReachError::ReachError;
};

class InvalidArgument : public ReachError {
public:
    using ReachError::ReachError;
};

/// Input files that cannot be parsed or fail validation.
class InputError : public ReachError {
public:
    using ReachError::ReachError;
};

/// The step-size search ran below the smallest representable step without
/// meeting the error bounds (only possible with a zero budget component).
class TuningFailure : public ReachError {
public:
    using ReachError::ReachError;
};

}  // namespace reach
