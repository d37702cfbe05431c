#pragma once

#include <stdexcept>
#include <string>

namespace infervar {

// Exception hierarchy. The categories map one-to-one onto the CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File system or decoding failure (exit code 3).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Precondition violation on numeric inputs, e.g. mismatched dims (exit code 4).
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace infervar
