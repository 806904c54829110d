#pragma once

#include <stdexcept>
#include <string>

namespace uqforge {

struct UqError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : UqError {
  using UqError::UqError;
};

struct EmptyDomainError : UqError {
  using UqError::UqError;
};

// Matrix factorization failure, typically a non-SPD covariance.
struct DecompositionError : UqError {
  using UqError::UqError;
};

struct InsufficientDataError : UqError {
  using UqError::UqError;
};

// Constant column, zero bandwidth and friends.
struct DegenerateDataError : UqError {
  using UqError::UqError;
};

struct InvalidStartError : UqError {
  using UqError::UqError;
};

// All plausibility weights vanished at a tempering level.
struct DegenerateLevelError : UqError {
  using UqError::UqError;
};

// QoI evaluation returned a non-finite value; carries the offending index.
struct QoiEvalError : UqError {
  QoiEvalError(const std::string& what, long index)
      : UqError(what + " (sample index " + std::to_string(index) + ")"),
        sample_index(index) {}
  long sample_index;
};

struct ParseError : UqError {
  ParseError(const std::string& what, long line)
      : UqError("line " + std::to_string(line) + ": " + what), line(line) {}
  long line;
};

struct IoError : UqError {
  using UqError::UqError;
};

struct UnsupportedOptionError : UqError {
  using UqError::UqError;
};

}  // namespace uqforge
