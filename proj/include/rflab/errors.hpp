#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rflab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two fields that must share a grid (or a shape) do not.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// An argument is outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A metric (or fiber metric) lost positive-definiteness at a grid point.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& what, std::size_t point)
      : Error(what + " not positive-definite at point " + std::to_string(point)),
        point_(point) {}
  std::size_t point() const { return point_; }

 private:
  std::size_t point_;
};

/// NaN/Inf, CFL violation, solver breakdown and similar run-time failures.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration; carries the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace rflab
