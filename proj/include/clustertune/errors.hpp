#pragma once

#include <stdexcept>
#include <string>

namespace clustertune {

// Base of every error raised by the library. Subclasses map one-to-one onto
// the failure classes callers are expected to distinguish.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A cell that failed to parse. `row` is the 1-based record number in the
// file, so the header is row 1 and the first data row is row 2.
class IngestionError : public Error {
 public:
  IngestionError(std::size_t row, std::string column, const std::string& detail)
      : Error("cannot parse cell at row " + std::to_string(row) + ", column '" + column +
              "': " + detail),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

// Input outside an algorithm's mathematical domain (e.g. negative cell for NMF).
class DomainError : public Error {
 public:
  using Error::Error;
};

class MetricUndefinedError : public Error {
 public:
  using Error::Error;
};

class DegenerateMetricError : public Error {
 public:
  using Error::Error;
};

class TestUndefinedError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace clustertune
