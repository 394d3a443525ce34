#include "hbvm/hamiltonian.hpp"

#include <cmath>

#include "hbvm/errors.hpp"

namespace hbvm {

Eigen::MatrixXd finite_difference_jacobian(
    const std::function<State(const State&)>& f, const State& y) {
  const Eigen::Index n = y.size();
  Eigen::MatrixXd jac(n, n);
  State yp = y;
  State ym = y;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = 1e-6 * (1.0 + std::abs(y(i)));
    yp(i) = y(i) + step;
    ym(i) = y(i) - step;
    jac.col(i) = (f(yp) - f(ym)) / (2.0 * step);
    yp(i) = y(i);
    ym(i) = y(i);
  }
  return jac;
}

VectorField linear_field(const Eigen::MatrixXd& L) {
  VectorField vf;
  vf.dim = static_cast<int>(L.rows());
  vf.f = [L](const State& y) -> State { return L * y; };
  vf.jacobian = [L](const State&) -> Eigen::MatrixXd { return L; };
  return vf;
}

HamiltonianSystem::HamiltonianSystem(int dim, ScalarFn energy,
                                     GradientFn gradient,
                                     std::optional<HessianFn> hessian)
    : dim_(dim),
      energy_(std::move(energy)),
      gradient_(std::move(gradient)),
      hessian_(std::move(hessian)) {
  if (dim_ < 2 || dim_ % 2 != 0) {
    throw InvalidArgument("Hamiltonian state dimension must be even and >= 2");
  }
  // The field copies the callables so it stays valid if *this moves.
  field_.dim = dim_;
  field_.f = [g = gradient_](const State& y) { return apply_j(g(y)); };
  if (hessian_) {
    field_.jacobian = [hs = *hessian_](const State& y) -> Eigen::MatrixXd {
      const Eigen::MatrixXd hess = hs(y);
      const Eigen::Index m = hess.rows() / 2;
      Eigen::MatrixXd out(hess.rows(), hess.cols());
      out.topRows(m) = hess.bottomRows(m);
      out.bottomRows(m) = -hess.topRows(m);
      return out;
    };
  } else {
    field_.jacobian = [f = field_.f](const State& y) {
      return finite_difference_jacobian(f, y);
    };
  }
}

Eigen::MatrixXd HamiltonianSystem::hessian(const State& y) const {
  if (hessian_) return (*hessian_)(y);
  return finite_difference_jacobian(gradient_, y);
}

Eigen::MatrixXd HamiltonianSystem::jacobian(const State& y) const {
  return field_.jacobian(y);
}

State HamiltonianSystem::apply_j(const State& v) {
  const Eigen::Index m = v.size() / 2;
  State out(v.size());
  out.head(m) = v.tail(m);
  out.tail(m) = -v.head(m);
  return out;
}

void HamiltonianSystem::add_invariant(std::string name, ScalarFn fn) {
  invariants_.emplace_back(std::move(name), std::move(fn));
}

HamiltonianSystem::ScalarFn HamiltonianSystem::invariant(
    const std::string& name) const {
  if (name == "H") return energy_;
  for (const auto& [n, fn] : invariants_) {
    if (n == name) return fn;
  }
  throw InvalidArgument("unknown invariant '" + name + "'");
}

}  // namespace hbvm
