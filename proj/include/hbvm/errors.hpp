#pragma once

#include <stdexcept>
#include <string>

namespace hbvm {

/// Bad argument supplied by the caller (s = 0, duplicate nodes, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A method-level precondition does not hold, e.g. a node set whose
/// interpolatory quadrature is not exact enough for the requested degree.
class PreconditionViolation : public std::logic_error {
 public:
  PreconditionViolation(const std::string& what, int measured_exactness)
      : std::logic_error(what), measured_exactness_(measured_exactness) {}

  int measured_exactness() const noexcept { return measured_exactness_; }

 private:
  int measured_exactness_;
};

/// Something that should not happen numerically (root polishing did not
/// converge, an eigen-solve failed, a singular block that cannot be singular).
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// State outside the domain of a Hamiltonian (log singularity, collision).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A time step could not be completed by the nonlinear solver.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, double last_residual, int iterations)
      : std::runtime_error(what),
        last_residual_(last_residual),
        iterations_(iterations) {}

  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

}  // namespace hbvm
