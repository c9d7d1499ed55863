#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model, prior or data text. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A data-file cell that is not a category index or `?`.
class DataError : public Error {
 public:
  DataError(std::size_t row, std::size_t column, const std::string& what)
      : Error("row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Graph shape problems that make a computation impossible (cycles, bad ids, shape mismatches).
class StructureError : public Error {
 public:
  using Error::Error;
};

/// Numeric preconditions violated (non-positive hyperparameters, ADF's alpha > 1/2, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The instance has probability zero under the weights in use.
class ZeroEvidenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Exhaustive enumeration refused because the induced-tree count exceeds the cap.
class CapExceededError : public Error {
 public:
  using Error::Error;
};

}  // namespace spn
