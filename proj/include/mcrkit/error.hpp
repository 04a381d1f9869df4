#pragma once

#include <stdexcept>
#include <string>

namespace mcr {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad shapes, malformed files, violated preconditions.
struct InputError : Error {
    using Error::Error;
};

// Argument outside the mathematical domain of a function.
struct DomainError : Error {
    using Error::Error;
};

// Ill-formed reaction or equilibrium model.
struct ModelError : Error {
    using Error::Error;
};

struct NumericalError : Error {
    using Error::Error;
};

}  // namespace mcr
