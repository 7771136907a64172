#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subgrad {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or domain violation in an argument (dimension mismatch, bad label, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// NaN or infinity where a finite number is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A sample stream ran dry before the requested number of iterations.
class StreamExhausted : public Error {
 public:
  using Error::Error;
};

/// Parameters that are individually valid but jointly unusable, e.g. a step
/// size above the stability ceiling.
class InvalidConfiguration : public Error {
 public:
  using Error::Error;
};

/// The requested operation exists but not for this configuration.
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Malformed or unsupported binary file (PGM header, truncated payload).
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace subgrad
