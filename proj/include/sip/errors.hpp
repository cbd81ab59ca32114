#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace sip {

// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// Raised by the expression parser; offset is a byte index into the input.
struct ParseError : Error {
  std::size_t offset;
  ParseError(const std::string& msg, std::size_t off) : Error(msg), offset(off) {}
};

// Function name that is not one of sin, cos, exp.
struct UnknownFunction : ParseError {
  using ParseError::ParseError;
};

struct EvalError : Error {
  using Error::Error;
};

// Point evaluation hit a zero denominator.
struct DivisionByZero : EvalError {
  using EvalError::EvalError;
};

// Interval evaluation hit a denominator interval straddling zero.
struct IntervalDivisionByZero : EvalError {
  using EvalError::EvalError;
};

// Expression references a variable outside the supplied assignment or boxes.
struct UnboundVariable : EvalError {
  using EvalError::EvalError;
};

struct GridSizeExceeded : Error {
  using Error::Error;
};

// An oracle returned a "violating" point whose constraint value is not
// strictly positive.
struct OracleContractViolation : Error {
  using Error::Error;
};

// A certified sub-solve could not be completed (node cap, failed refinement).
struct SubsolverError : Error {
  using Error::Error;
};

// Instance file problem; line is 1-based.
struct InstanceFormatError : Error {
  int line;
  InstanceFormatError(const std::string& msg, int line_no)
      : Error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

}  // namespace sip
