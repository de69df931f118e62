#pragma once

#include <stdexcept>
#include <string>

namespace tlb {

// Base of every error raised by the toolkit. The CLI maps the subclasses onto
// exit codes: IoError -> 2, everything else -> 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed JSON or binary container.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line_(line), column_(column) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_ = 0;
  std::size_t column_ = 0;
};

// Domain invariant broken (partition violation, bad label range, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Inconsistent embedding or parameter dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Impossible generator / training / scoring configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller-supplied arguments that do not fit together (length mismatch,
// missing prediction, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// Tensor shape mismatch.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tlb
