#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fcl {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed expression or metric-file text. `position` is a 0-based byte
// offset into the offending source (or npos when not applicable).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position = std::string::npos)
      : Error(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// Structurally valid input that violates a semantic constraint
// (excluded exponent, empty domain box, mismatched dimensions, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A numerical quantity left its domain: division by zero, ln of a
// non-positive number, indefinite metric, direction outside the cone, ...
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace fcl
