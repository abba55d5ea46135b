#pragma once

#include <stdexcept>
#include <string>

namespace nvc {

// Base of every error thrown by the library. The CLI maps subclasses onto
// exit codes (see ExitCode in nvc/cli/commands.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violations: bad sizes, non-finite values, malformed configs.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input data that cannot be used (parse failures, missing channels).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : DataError("row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

// Numerical degeneracies of the rank statistics.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// sum_j L_j (n - L_j) == 0: every response value tied.
class DegenerateRanks : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Denominator of T_n at or below epsilon: response components are
// (numerically) functions of each other.
class DegenerateDenominator : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BlockTooLong : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class EmptyBand : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

}  // namespace nvc
