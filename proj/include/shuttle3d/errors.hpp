#pragma once

#include <stdexcept>
#include <string>

namespace shuttle3d {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments, files or preconditions supplied by the caller.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: degenerate geometry, diverged integration, points at
/// infinity.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometry : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IntegrationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace shuttle3d
