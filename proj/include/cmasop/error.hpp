#pragma once

#include <stdexcept>
#include <string>

namespace cmasop {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class InvalidFitness : public Error {
 public:
  using Error::Error;
};

// Covariance factorization failed or produced a non-finite / non-positive
// spectrum. The optimizer turns this into a numerical-error termination.
class DecompositionFailure : public Error {
 public:
  using Error::Error;
};

class InvalidSubspace : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A precondition the caller was responsible for did not hold.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace cmasop
