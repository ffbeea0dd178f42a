#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace biocom {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A normalized synonym claimed by two concepts.
class AmbiguityError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values reached the loss or the optimizer.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace biocom
