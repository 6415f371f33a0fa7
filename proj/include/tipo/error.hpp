#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tipo {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Data-file problems. Parse and schema errors carry the 1-based line number
// (0 when the error is not tied to a line).
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class MaskedActionError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace tipo
