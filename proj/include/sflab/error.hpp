#pragma once

#include <stdexcept>
#include <string>

namespace sflab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGridError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (non-unit quaternion, bad delta, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent sizes between fields, operators and vectors.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Connection form is not anti-Hermitian within tolerance.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Spectral-flow step budget exhausted before reaching the end of the path.
class RefinementError : public Error {
 public:
  RefinementError(const std::string& what, double reached_t, int accepted_steps)
      : Error(what), reached_t(reached_t), accepted_steps(accepted_steps) {}
  double reached_t;
  int accepted_steps;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized data (field container, result JSON, cache entry).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace sflab
