#pragma once

#include <stdexcept>
#include <string>

namespace ilnn {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Shape or length mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration (curvature mismatch, bad flags,
/// malformed config keys, incompatible checkpoint/dataset dimensions).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An input left the mathematical domain of an operation (acosh argument
/// below the clamping window, non-finite values, ball-radius violation).
class NumericDomainError : public Error {
 public:
  using Error::Error;
};

/// A caller-side contract was violated (wrong argument combination,
/// tangency violation, non-scalar loss, all-zero weights).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Operation issued against an object in the wrong state (eval with
/// never-updated running statistics, nested tapes in one context).
class StateError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to converge within its budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A hyperplane row norm fell below the representable floor.
class DegenerateHyperplaneError : public Error {
 public:
  using Error::Error;
};

/// Training was aborted (non-finite gradient or loss); carries the name of
/// the offending parameter when known.
class TrainingAbortedError : public Error {
 public:
  using Error::Error;
};

/// A "cannot happen" internal consistency check failed.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ilnn
