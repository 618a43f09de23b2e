#pragma once

#include <stdexcept>
#include <string>

namespace ktsafe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unknown vertex id.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Attribute code outside its declared domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operation applied to the sensitive attribute where only quasi-identifiers
/// are allowed.
class PolicyError : public Error {
 public:
  using Error::Error;
};

/// Violated precondition (mismatched radii, bad parameter, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Cost model used without a usable sample.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// Index queried or built in a state it cannot handle.
class IndexError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ktsafe
