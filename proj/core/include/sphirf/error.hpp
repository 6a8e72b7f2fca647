#pragma once

#include <stdexcept>
#include <string>

namespace sphirf {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, configuration or input files. The CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a function (|x| > 1, negative time, ...).
class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Invalid harmonic index (m > l, negative degree, degree above the cap).
class IndexError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Malformed input file; the message carries the offending line number.
class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IoError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A numerical procedure failed (factorization, singular design, ...). Exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

class NotPositiveSemidefiniteError : public NumericError {
 public:
  using NumericError::NumericError;
};

class SingularConfigurationError : public NumericError {
 public:
  using NumericError::NumericError;
};

class RankDeficiencyError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace sphirf
