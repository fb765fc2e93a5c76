#pragma once

#include <stdexcept>
#include <string>

namespace parastab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments of an operation does not hold.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed external input (plant files, design files, command lines).
class InputError : public Error {
 public:
  using Error::Error;
};

/// An interpolation node sits on the imaginary axis where the target value
/// vanishes; no unit can interpolate there.
class DegenerateInterpolation : public Error {
 public:
  using Error::Error;
};

/// A unit candidate does not satisfy the divisibility condition it claims.
class InconsistentCandidate : public Error {
 public:
  using Error::Error;
};

/// Fixed-step simulation cannot proceed (singular algebraic loop or an
/// integration step outside the stability region).
class SimulationError : public Error {
 public:
  using Error::Error;
};

}  // namespace parastab
