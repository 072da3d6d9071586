#pragma once

#include <stdexcept>
#include <string>

namespace riemsa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed points/tangents, mismatched base points, cut-locus inputs.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Loss of positive-definiteness, singular systems, non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Precondition violations on bound evaluators and analysis routines.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Configuration problems; `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : "config field '" + field + "': " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace riemsa
