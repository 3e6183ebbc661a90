#pragma once

#include <stdexcept>
#include <string>

namespace bcns {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad exponent, wrong grid, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Spectral data handed to an inverse transform is not the spectrum of a real field.
class SymmetryViolation : public Error {
 public:
  using Error::Error;
};

/// A field that must have vanishing mean (the S'_h setting) does not.
class NonzeroMean : public Error {
 public:
  using Error::Error;
};

class CflViolation : public Error {
 public:
  using Error::Error;
};

/// 1 + a came too close to zero.
class VacuumViolation : public Error {
 public:
  using Error::Error;
};

class BlowUp : public Error {
 public:
  using Error::Error;
};

class NumericFault : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace bcns
