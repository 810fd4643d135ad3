#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tmaf {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value at an input boundary, or non-finite loss during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A configuration (or argument set) failed validation. Carries every
/// violation found, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Model file could not be read or does not match the expected architecture.
class ModelFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace tmaf
