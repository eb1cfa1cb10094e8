#pragma once

#include <stdexcept>
#include <string>

namespace lgan {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes do not compose (channel mismatch, inner dimension mismatch, ...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A caller violated an operation precondition (non-scalar loss, empty sequence, k out of range).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed or unusable (bad cell, unknown label, degenerate class layout).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Configuration value is missing, unknown, or out of range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN/Inf or failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace lgan
