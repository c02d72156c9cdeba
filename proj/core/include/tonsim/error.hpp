#pragma once

#include <stdexcept>
#include <string>

namespace tonsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied parameter is outside its documented range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// An input lies outside the domain of a formula (e.g. C <= 2 for the capacity law).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Least-squares problem has fewer independent directions than parameters.
class RankDeficiency : public Error {
 public:
  using Error::Error;
};

/// Target ln r1 lies above the surface asymptote c, so no flat cost reaches it.
class InfeasibleRate : public Error {
 public:
  using Error::Error;
};

/// Surface parameters cannot be inverted (A >= 0 or B_psi == 0).
class InvalidSurface : public Error {
 public:
  using Error::Error;
};

/// Simulation clock moved backwards. Indicates a bug, never user error.
class ClockError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Operation was applied to a node in the wrong state. Indicates a bug.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace tonsim
