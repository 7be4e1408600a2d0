#pragma once

#include <stdexcept>
#include <string>

namespace peierls {

// Invalid input or a violated model hypothesis.  The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure inside a numerical routine (exit code 3).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateLatticeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ResolutionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NearDegeneracyError : public NumericError {
 public:
  using NumericError::NumericError;
};

class TransportStepError : public NumericError {
 public:
  using NumericError::NumericError;
};

class CoverageError : public NumericError {
 public:
  using NumericError::NumericError;
};

class NearSingularError : public NumericError {
 public:
  using NumericError::NumericError;
};

class InconsistentSymbolError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace peierls
