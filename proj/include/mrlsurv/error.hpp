#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mrlsurv {

// Base for every error raised by the library. The message is meant to be
// shown to the user as-is.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed input file: wrong columns, unparsable rows.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t row, const std::string& what)
      : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// An estimator could not produce a defined result for the given data.
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace mrlsurv
