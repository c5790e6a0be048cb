#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace neurovec {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A feature name or value that cannot form a token.
class TokenError : public Error {
public:
  using Error::Error;
};

/// Bad input data: unreadable file, ragged rows, unparseable or missing cells.
class DataError : public Error {
public:
  using Error::Error;
};

/// DataError attached to a specific 1-based data row (header excluded).
class RowError : public DataError {
public:
  RowError(std::size_t row, const std::string& what)
      : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

private:
  std::size_t row_;
};

class SplitError : public DataError {
public:
  using DataError::DataError;
};

/// Internal inconsistency of a neurovector store (wrong target kind, unknown id).
class StoreError : public Error {
public:
  using Error::Error;
};

/// Prediction requested but no model or no match is available under the active policy.
class NoModelError : public Error {
public:
  using Error::Error;
};

/// Base for model-file problems.
class ModelError : public Error {
public:
  using Error::Error;
};

class VersionMismatchError : public ModelError {
public:
  VersionMismatchError(int found, int supported)
      : ModelError("model format version " + std::to_string(found) +
                   " is not supported (this build reads version " +
                   std::to_string(supported) + ")"),
        found_(found), supported_(supported) {}

  int found() const noexcept { return found_; }
  int supported() const noexcept { return supported_; }

private:
  int found_;
  int supported_;
};

class ChecksumMismatchError : public ModelError {
public:
  using ModelError::ModelError;
};

class MalformedModelError : public ModelError {
public:
  using ModelError::ModelError;
};

/// Model and data disagree (task, columns).
class SchemaMismatchError : public ModelError {
public:
  using ModelError::ModelError;
};

}  // namespace neurovec
