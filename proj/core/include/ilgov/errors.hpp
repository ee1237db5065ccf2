#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ilgov {

// Base for every error the library raises. The CLI maps the subclasses onto
// its exit codes (spec error 2, I/O 3, numeric 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite input or intermediate value.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed text artifact. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Structurally valid file whose content breaks a format rule (duplicates, version).
class FormatError : public Error {
 public:
  using Error::Error;
};

// A trace-backed plant was asked for an (epoch, configuration) pair it never recorded.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace ilgov
