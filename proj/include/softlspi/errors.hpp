#pragma once

#include <stdexcept>
#include <string>

namespace softlspi {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment or operator configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Degenerate world geometry, e.g. no free space to sample from.
class GeometryError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Malformed or non-finite input data (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Linear-algebra failure: singular systems, unwhitenable covariances (CLI exit code 4).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition (dimension mismatch, out-of-domain input).
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace softlspi
