#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hbvm {

using State = Eigen::VectorXd;

/// Autonomous ODE y' = f(y) with a Jacobian. Hamiltonian systems expose one
/// of these; the stage solvers only need this much.
struct VectorField {
  int dim = 0;
  std::function<State(const State&)> f;
  std::function<Eigen::MatrixXd(const State&)> jacobian;
};

/// Central finite-difference Jacobian of f with step 1e-6 (1 + |y_i|).
Eigen::MatrixXd finite_difference_jacobian(
    const std::function<State(const State&)>& f, const State& y);

/// Linear field y' = L y.
VectorField linear_field(const Eigen::MatrixXd& L);

/// Canonical Hamiltonian system y = (q, p), y' = J grad H(y) with
/// J = [[0, I_m], [-I_m, 0]].
class HamiltonianSystem {
 public:
  using ScalarFn = std::function<double(const State&)>;
  using GradientFn = std::function<State(const State&)>;
  using HessianFn = std::function<Eigen::MatrixXd(const State&)>;

  HamiltonianSystem(int dim, ScalarFn energy, GradientFn gradient,
                    std::optional<HessianFn> hessian = std::nullopt);

  int dim() const { return dim_; }
  int half_dim() const { return dim_ / 2; }

  double energy(const State& y) const { return energy_(y); }
  State gradient(const State& y) const { return gradient_(y); }
  bool has_hessian() const { return hessian_.has_value(); }
  /// Analytic Hessian if available, else finite differences of the gradient.
  Eigen::MatrixXd hessian(const State& y) const;

  /// J * grad H(y).
  State vector_field(const State& y) const { return apply_j(gradient_(y)); }
  /// J * Hess H(y).
  Eigen::MatrixXd jacobian(const State& y) const;
  const VectorField& field() const { return field_; }

  /// (a, b) -> (b, -a) on the (q, p) halves.
  static State apply_j(const State& v);

  void add_invariant(std::string name, ScalarFn fn);
  const std::vector<std::pair<std::string, ScalarFn>>& extra_invariants() const {
    return invariants_;
  }
  /// "H" or the name of an extra invariant; throws InvalidArgument otherwise.
  ScalarFn invariant(const std::string& name) const;

 private:
  int dim_;
  ScalarFn energy_;
  GradientFn gradient_;
  std::optional<HessianFn> hessian_;
  std::vector<std::pair<std::string, ScalarFn>> invariants_;
  VectorField field_;
};

}  // namespace hbvm
