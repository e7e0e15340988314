#pragma once

#include <stdexcept>
#include <string>

namespace aptsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

/// Normalized eigenvalues E/Gamma requested with Gamma = 0.
class UndefinedNormalization : public Error {
 public:
  using Error::Error;
};

class InvalidOverlap : public Error {
 public:
  using Error::Error;
};

/// CPT construction requested outside r = Gamma/J < 1.
class InvalidRegime : public Error {
 public:
  using Error::Error;
};

class ZeroState : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class FitDiverged : public Error {
 public:
  using Error::Error;
};

class DegenerateTrace : public Error {
 public:
  using Error::Error;
};

}  // namespace aptsim
