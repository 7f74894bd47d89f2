#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mpspec {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A documented precondition on the input data does not hold
/// (e.g. a contour that fails to enclose the spectrum).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative method or adaptive quadrature hit its refinement cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure inside one Monte Carlo replication; carries the replication index.
class ReplicationError : public std::runtime_error {
 public:
  ReplicationError(std::size_t index, const std::string& what)
      : std::runtime_error("replication " + std::to_string(index) + ": " + what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace mpspec
