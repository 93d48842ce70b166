#pragma once

#include <stdexcept>
#include <string>

namespace qmeas {

/// Base of every error the library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ArgumentError : Error {
  using Error::Error;
};

/// A dimension or size exceeds a configured limit.
struct CapacityError : Error {
  using Error::Error;
};

/// Input violates a mathematical precondition (Hermiticity, normalization, support, ...).
struct ValidationError : Error {
  using Error::Error;
};

/// Model parameters that cannot realize the requested construction.
struct ConfigurationError : ValidationError {
  using ValidationError::ValidationError;
};

struct ProtocolError : Error {
  using Error::Error;
};

struct UnsupportedModelError : Error {
  using Error::Error;
};

/// A numerical monitor (leakage, norm drift) exceeded its tolerance.
struct NumericalError : Error {
  using Error::Error;
};

/// Malformed or unknown configuration input; carries the offending line (0 if none).
struct ConfigError : Error {
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line(line) {}
  int line;
};

}  // namespace qmeas
