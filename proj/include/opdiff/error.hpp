#pragma once

#include <stdexcept>
#include <string>

namespace opdiff {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two objects that must live on the same grid do not.
class SpecMismatchError : public Error {
 public:
  using Error::Error;
};

class InvalidGridError : public Error {
 public:
  using Error::Error;
};

class InvalidCoefficientError : public Error {
 public:
  using Error::Error;
};

/// A quadratic form expected to be non-negative came out negative beyond tolerance.
class NotNonnegativeError : public Error {
 public:
  using Error::Error;
};

class ModeRangeError : public Error {
 public:
  using Error::Error;
};

/// A dense check was requested on a grid larger than the configured cap.
class TooLargeError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent experiment/scheme configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failure inside an iterative solve (iteration limit, breakdown, non-convergence).
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace opdiff
