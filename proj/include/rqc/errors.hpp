#pragma once

#include <stdexcept>
#include <string>

namespace rqc {

// Base class for every error raised by the library. The CLI maps each
// subclass onto a distinct exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text, JSON or matrix literal.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A precondition on values (unitarity, normalization, parameter range).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Shapes or subsystem dimensions that do not fit together.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A named gate, operation or mode that is not registered.
class UnknownName : public Error {
 public:
  using Error::Error;
};

// A numerical routine could not reach its stated accuracy.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace rqc
