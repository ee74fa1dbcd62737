#pragma once

#include <stdexcept>
#include <string>

namespace preytaxis {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a function (negative density, v = 0 in a log, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A model or configuration violates its construction invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Bracketed root-finding could not find a sign change.
class RootFindError : public Error {
 public:
  using Error::Error;
};

/// Not enough samples to compute a statistic.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace preytaxis
