#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stable_tmle {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Triangular factorization hit a non-positive pivot.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(std::size_t pivot, double value)
      : Error("matrix is not positive definite (pivot " + std::to_string(pivot) +
              " = " + std::to_string(value) + ")"),
        pivot_(pivot),
        value_(value) {}

  std::size_t pivot() const noexcept { return pivot_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t pivot_;
  double value_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Covariance of the trigonometric features could not be factored even with
/// the largest permitted ridge.
class FactorizationFailure : public Error {
 public:
  using Error::Error;
};

/// The empirical characteristic function is too close to 0 or 1 to invert.
class DegenerateSample : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace stable_tmle
