#pragma once

#include <stdexcept>
#include <string>

namespace emshs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: malformed files, out-of-range ids, degenerate columns.
class DataError : public Error {
 public:
  using Error::Error;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class IndexError : public DataError {
 public:
  using DataError::DataError;
};

class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

// Invalid hyperparameters or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace emshs
