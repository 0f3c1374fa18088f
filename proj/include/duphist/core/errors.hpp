#pragma once

#include <stdexcept>
#include <string>

namespace duphist {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Atom-index span outside the sequence.
class CoordinateError : public Error {
 public:
  using Error::Error;
};

// Event that is malformed against its sequence (empty spans, target inside source, ...).
class ValidityError : public Error {
 public:
  using Error::Error;
};

// Event cannot be inverted against the given state.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a distribution.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Input data inconsistent (missing sequences, length mismatch, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line_{line},
        column_{column} {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Broken internal invariant; should be unreachable.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace duphist
