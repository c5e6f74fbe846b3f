#pragma once

#include <stdexcept>
#include <string>

namespace aionfit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter outside its mathematical domain (e.g. alpha outside [0,1]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent body-model arrays.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or malformed caller-supplied data.
class InputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared during evaluation.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, long index)
      : Error(what + " (parameter index " + std::to_string(index) + ")"), index_(index) {}

  long index() const { return index_; }

 private:
  long index_;
};

/// Point at or behind the camera plane.
class BehindCameraError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace aionfit
