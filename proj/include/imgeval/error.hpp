#pragma once

#include <stdexcept>
#include <string>

namespace imgeval {

/// Base class for every error raised by the library. Subclasses carry the
/// category; the CLI maps all of them to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File content does not follow the expected binary/text format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Sidecar or manifest JSON is malformed or carries unknown values.
class MetadataError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Parameters violate their documented domain.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input is numerically degenerate for the requested operation
/// (constant signal, too few samples, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace imgeval
