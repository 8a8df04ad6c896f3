#pragma once

#include <stdexcept>
#include <string>

namespace rydlife {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// State outside the supported (n, L, J) channels of the loaded species data.
class UnsupportedStateError : public Error {
 public:
  using Error::Error;
};

/// Pair of states not connected by an electric-dipole transition.
class SelectionRuleError : public Error {
 public:
  using Error::Error;
};

/// Integration or linear-algebra failure; the message carries diagnostics.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Exponential fit that did not converge or had unusable input.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text; the message names the offending line or row.
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rydlife
