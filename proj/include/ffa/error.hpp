#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ffa {

// Base of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or dataset shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values or config file structure.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Binary/serialized file with the wrong magic number or version.
class FormatError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf reached a gradient or a loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Model training could not proceed (e.g. single-class data).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace ffa
