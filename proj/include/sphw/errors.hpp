#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sphw {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter outside its admissible range (nonpositive h, theta not in {0,1}, ...).
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// Pressure function evaluated at a density where it is singular.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Requested computation exceeds a configured memory budget.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// Inputs whose shapes do not agree (dimension, time grids, sizes).
class MismatchError : public Error {
public:
    using Error::Error;
};

/// Non-finite state encountered during time integration.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t step, const std::string& what)
        : Error("divergence at step " + std::to_string(step) + ": " + what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

} // namespace sphw
