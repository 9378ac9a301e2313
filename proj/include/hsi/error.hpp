#pragma once

#include <stdexcept>
#include <string>

namespace hsi {

// Error categories map onto the CLI exit codes (2 config, 3 data, 4 numeric).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File-system and raster-size problems.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Data that was read correctly but breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace hsi
