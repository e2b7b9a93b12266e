#pragma once

#include <stdexcept>
#include <string>

namespace cspat {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid grid / geometry / solver parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Unreadable or malformed input file.
class InputError : public Error {
public:
    using Error::Error;
};

// Operand shapes do not match.
class ShapeError : public Error {
public:
    using Error::Error;
};

// CFL violation, blow-up, divergence or non-convergence.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace cspat
