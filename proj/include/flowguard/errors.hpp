#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flowguard {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flow CSV header problems: missing required column, malformed header row.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& column, const std::string& what)
      : Error(what), column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

// A data cell that could not be parsed. Rows are 1-based data rows (header excluded).
class RowError : public Error {
 public:
  RowError(std::size_t row, std::string column, const std::string& what)
      : Error(what), row_(row), column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

// Raw value outside the domain of its normalization kind.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class CorruptionError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// The original training set is missing or fails its checksum.
class UnrecoverableStoreError : public Error {
 public:
  using Error::Error;
};

}  // namespace flowguard
