#pragma once

#include <stdexcept>
#include <string>

namespace tclfit {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched or unsupported matrix / vector dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input data that violates a documented contract (ranges, schema, state validity).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed document. `field` names the offending key path when known.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& field, const std::string& what)
      : ValidationError(field.empty() ? what : field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A document written under a different schema version.
class MigrationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Floating-point breakdown: divergence, failed root bracketing, unrecoverable states.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace tclfit
