#pragma once

#include <stdexcept>
#include <string>

namespace mbrdiv {

/// Input violates a documented precondition (bad shapes, bad weights, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoGoldReferencesError : public ValidationError {
 public:
  NoGoldReferencesError() : ValidationError("no gold references") {}
  explicit NoGoldReferencesError(const std::string& id)
      : ValidationError("no gold references for instance '" + id + "'") {}
};

class InvalidUtilityOutputError : public ValidationError {
 public:
  InvalidUtilityOutputError(std::size_t row, std::size_t col)
      : ValidationError("invalid utility output at (" + std::to_string(row) + "," +
                        std::to_string(col) + ")"),
        row_(row),
        col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class ScoreNotFoundError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ZeroVarianceError : public ValidationError {
 public:
  ZeroVarianceError() : ValidationError("zero variance: correlation undefined for a constant series") {}
};

class DegenerateCorrelationError : public ValidationError {
 public:
  explicit DegenerateCorrelationError(double r)
      : ValidationError("degenerate correlation " + std::to_string(r) +
                        ": atanh diverges at |r| = 1") {}
};

}  // namespace mbrdiv
