#pragma once

#include <stdexcept>
#include <string>

namespace expectation_atlas {

// Root of every error raised by the library. The CLI maps each subclass to a
// distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a type invariant (non-Hermitian matrix, dependent set, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of an operation (length mismatch, N < 2, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Iterative numerics failed to produce a trustworthy answer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Operation-specific precondition not met (non-commuting set, non-interior
// target, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Requested operation is not available for the given problem size.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace expectation_atlas
