#pragma once

#include <stdexcept>
#include <string>

namespace qdiv {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or subsystem dimensions do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of the operation (negative alpha,
/// non-Hermitian matrix, log of a negative eigenvalue, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A superoperator is too close to singular to be inverted.
class NonInvertibleError : public Error {
 public:
  NonInvertibleError(const std::string& what, double smallest_singular_value)
      : Error(what), smallest_singular_value_(smallest_singular_value) {}

  double smallest_singular_value() const noexcept { return smallest_singular_value_; }

 private:
  double smallest_singular_value_;
};

/// An iterative solver (SDP, integrator) failed to deliver a trustworthy answer.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::string status)
      : Error(what), status_(std::move(status)) {}

  const std::string& status() const noexcept { return status_; }

 private:
  std::string status_;
};

}  // namespace qdiv
