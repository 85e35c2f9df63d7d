#pragma once

#include <stdexcept>
#include <string>

namespace soundscape {

/// Base for every failure caused by bad input data or arguments. The CLI maps
/// these to exit code 1; anything else escaping is an internal error.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an operation argument does not hold.
class ArgumentError : public InputError {
 public:
  using InputError::InputError;
};

/// A file or stream does not conform to its documented format.
class FormatError : public InputError {
 public:
  using InputError::InputError;
};

/// Manifest loading failure; the message names the offending row.
class LoadError : public FormatError {
 public:
  LoadError(const std::string& what, std::size_t row)
      : FormatError(what + ", row " + std::to_string(row)), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Zero or non-finite norm where a direction is required.
class DegenerateVectorError : public InputError {
 public:
  using InputError::InputError;
};

/// A series with zero variance was passed to a correlation.
class DegenerateSeriesError : public InputError {
 public:
  using InputError::InputError;
};

/// A user supplied table or run configuration is unusable.
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace soundscape
