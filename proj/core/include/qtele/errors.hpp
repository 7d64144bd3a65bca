#pragma once

#include <stdexcept>
#include <string>

namespace qtele {

/// Out-of-range parameter, malformed index set, or dimension mismatch.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation produced a value that cannot be trusted (singular matrix,
/// probability far outside [0, 1], truncation budget exceeded, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ratio-type figure of merit with a vanishing denominator.
class UndefinedValue : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Root search found no sign change in the requested bracket.
class NoBracket : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Fock truncation would exceed the requested deficit.
class DeficitExceeded : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Malformed input data; carries the 1-based line number when known.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qtele
