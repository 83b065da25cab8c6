#pragma once

#include <stdexcept>
#include <string>

namespace drivestat {

/// Base of every error raised by the library. The CLI maps subclasses onto
/// exit codes: Data/Parameter/Domain errors are input problems (2),
/// Degenerate/Grid/Analytic errors are analytic failures (3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the support or the admissible range of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid distribution or configuration parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input too small, constant, or otherwise unable to support an estimate.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Density grids that do not match, do not cover the data, or lost mass.
class GridError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files or missing columns.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical procedure failed to produce an admissible answer.
class AnalyticError : public Error {
 public:
  using Error::Error;
};

}  // namespace drivestat
