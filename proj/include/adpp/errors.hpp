#pragma once

#include <stdexcept>
#include <string>

namespace adpp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vectors or tables whose sizes do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid model or experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An argument outside the domain where a formula is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace adpp
