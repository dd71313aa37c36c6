#pragma once

#include <stdexcept>
#include <string>

namespace ddmpc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch between vectors, matrices or sequences.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Index outside of the valid range of a sequence.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Hankel depth larger than the sequence length.
class WindowTooDeepError : public Error {
 public:
  using Error::Error;
};

/// Fewer past samples than the state-order bound requires.
class InsufficientHistoryError : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration (negative bounds, missing keys, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Measured data is not rich enough (rank deficiency, missing excitation).
class DataQualityError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation was violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A supplied signal violates its declared bound.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Error in an input or output file.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddmpc
