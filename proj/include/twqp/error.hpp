#pragma once

#include <stdexcept>
#include <string>

namespace twqp {

// Exception families map one-to-one onto CLI exit codes (2, 3, 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
  virtual int exit_code() const noexcept { return 1; }
};

/// Malformed or inconsistent user input (files, dimensions, parameters).
class InputError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "InputError"; }
  int exit_code() const noexcept override { return 2; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "NumericalError"; }
  int exit_code() const noexcept override { return 3; }
};

class NotPositiveDefinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
  const char* kind() const noexcept override { return "NotPositiveDefinite"; }
};

class AsymmetricInput : public InputError {
 public:
  using InputError::InputError;
  const char* kind() const noexcept override { return "AsymmetricInput"; }
};

/// A piece-count or memory guard tripped during a solve.
class ResourceCapExceeded : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "ResourceCapExceeded"; }
  int exit_code() const noexcept override { return 4; }
};

/// Every ESOC point in the evaluation range was flagged as an outlier.
class AllFlagged : public NumericalError {
 public:
  using NumericalError::NumericalError;
  const char* kind() const noexcept override { return "AllFlagged"; }
};

/// Every tuning configuration flagged too many outliers or failed.
class AllConfigsDiscarded : public NumericalError {
 public:
  using NumericalError::NumericalError;
  const char* kind() const noexcept override { return "AllConfigsDiscarded"; }
};

}  // namespace twqp
