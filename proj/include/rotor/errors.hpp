#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rotor {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parameter-level errors: the caller asked for something outside the model.
class InvalidInput : public Error {
public:
    using Error::Error;
};

class NotAResonance : public Error {
public:
    using Error::Error;
};

class UnsupportedParams : public Error {
public:
    using Error::Error;
};

class InvalidBand : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

// Computational errors.
class NotUnitary : public Error {
public:
    using Error::Error;
};

class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

class PoleHit : public Error {
public:
    using Error::Error;
};

class DegenerateResidue : public Error {
public:
    using Error::Error;
};

class DegenerateFactor : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Raised when eigenvector matching between neighbouring samples cannot pick
/// a unique continuation. `grid_index` is the sample that failed.
class TrackingAmbiguity : public Error {
public:
    TrackingAmbiguity(const std::string& what, std::size_t grid_index)
        : Error(what), grid_index_(grid_index) {}

    std::size_t grid_index() const noexcept { return grid_index_; }

private:
    std::size_t grid_index_;
};

} // namespace rotor
