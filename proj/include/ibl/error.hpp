#pragma once

#include <stdexcept>
#include <string>

namespace ibl {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, malformed input, dimension mismatch, bad index.
/// The CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A dataset violates one of the standing assumptions (nonzero entries,
/// linear separability). The message names the assumption.
class AssumptionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// NaN/overflow, zero denominators, solver non-convergence. Exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// The margin constraints x_i . w >= 1 admit no solution.
class InfeasibleError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace ibl
