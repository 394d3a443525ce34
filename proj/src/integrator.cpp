#include "hbvm/integrator.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "hbvm/errors.hpp"
#include "hbvm/legendre.hpp"

namespace hbvm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

StageSolution solve_fixed_point(const VectorField& field, const HbvmTableau& t,
                                const FixedPointSolver& fp, const State& y0,
                                double h) {
  const Eigen::Index n = t.stages();
  const Eigen::MatrixXd AT = t.A.transpose();
  Eigen::MatrixXd Y = y0 * Eigen::RowVectorXd::Ones(n);
  Eigen::MatrixXd F(y0.size(), n);
  StageSolution out;
  for (int sweep = 1; sweep <= fp.max_sweeps; ++sweep) {
    for (Eigen::Index i = 0; i < n; ++i) F.col(i) = field.f(Y.col(i));
    const Eigen::MatrixXd next =
        y0 * Eigen::RowVectorXd::Ones(n) + h * (F * AT);
    const double update = (next - Y).cwiseAbs().maxCoeff();
    out.residual = update;
    Y = next;
    out.iterations = sweep;
    if (!std::isfinite(update)) {
      out.last_update = update;
      break;
    }
    if (polish_done(out, update, stage_tolerance(fp.tol, y0, Y), Y)) break;
  }
  out.stages.clear();
  out.stage_derivatives.clear();
  for (Eigen::Index i = 0; i < n; ++i) {
    out.stages.emplace_back(Y.col(i));
    out.stage_derivatives.emplace_back(field.f(Y.col(i)));
  }
  return out;
}

}  // namespace

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "fixed") return SolverKind::fixed_point;
  if (name == "newton") return SolverKind::simplified_newton;
  if (name == "blended") return SolverKind::blended;
  throw InvalidArgument("unknown solver '" + std::string(name) + "'");
}

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::fixed_point:
      return "fixed";
    case SolverKind::simplified_newton:
      return "newton";
    case SolverKind::blended:
      return "blended";
  }
  return "blended";
}

Solver make_solver(SolverKind kind, const HbvmTableau& t, double tol) {
  switch (kind) {
    case SolverKind::fixed_point:
      return FixedPointSolver{tol, 200};
    case SolverKind::simplified_newton:
      return SimplifiedNewtonSolver{select_fundamental(t), tol, 50};
    case SolverKind::blended: {
      BlendedSolver b{select_fundamental(t), {}};
      b.config = default_blended_config(b.partition);
      b.config.newton_tol = tol;
      return b;
    }
  }
  throw InvalidArgument("unknown solver kind");
}

double solver_tolerance(const Solver& solver) {
  return std::visit(Overloaded{
                        [](const FixedPointSolver& s) { return s.tol; },
                        [](const SimplifiedNewtonSolver& s) { return s.tol; },
                        [](const BlendedSolver& s) { return s.config.newton_tol; },
                    },
                    solver);
}

State dense_eval(const DenseOutput& d, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw InvalidArgument("dense output is only defined for tau in [0,1]");
  }
  const int s = static_cast<int>(d.gamma_coeffs.size());
  State out = d.y0;
  if (s == 0) return out;
  const auto integrals = integrate_basis(s, tau);
  for (int j = 0; j < s; ++j) out += d.h * integrals[j] * d.gamma_coeffs[j];
  return out;
}

StepResult step(const VectorField& field, const HbvmTableau& t,
                const Solver& solver, const State& y0, double t0, double h) {
  if (y0.size() != field.dim) {
    throw InvalidArgument("initial state has the wrong dimension");
  }
  const StageSolution sol = std::visit(
      Overloaded{
          [&](const FixedPointSolver& s) {
            return solve_fixed_point(field, t, s, y0, h);
          },
          [&](const SimplifiedNewtonSolver& s) {
            return solve_stages_newton(field, t, s.partition, y0, h, s.tol,
                                       s.max_iter);
          },
          [&](const BlendedSolver& s) {
            return solve_stages(field, t, s.partition, s.config, y0, h);
          },
      },
      solver);
  if (!sol.converged) {
    throw StepFailure("stage solver did not converge at t = " +
                          std::to_string(t0),
                      sol.residual, sol.iterations);
  }

  StepResult r;
  const auto& w = t.rule.weights;
  State incr = State::Zero(y0.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    incr += w[i] * sol.stage_derivatives[i];
  }
  r.y1 = y0 + h * incr;

  r.dense.y0 = y0;
  r.dense.t0 = t0;
  r.dense.h = h;
  r.dense.gamma_coeffs.assign(static_cast<std::size_t>(t.s),
                              State::Zero(y0.size()));
  for (std::size_t l = 0; l < w.size(); ++l) {
    const auto row = static_cast<Eigen::Index>(l);
    for (int j = 0; j < t.s; ++j) {
      r.dense.gamma_coeffs[j] += w[l] * t.P_mat(row, j) * sol.stage_derivatives[l];
    }
  }
  r.stats.iterations = sol.iterations;
  r.stats.residual = sol.residual;
  r.stages = sol.stages;
  return r;
}

const std::vector<double>& Trajectory::series(const std::string& name) const {
  for (const auto& [n, values] : invariant_series) {
    if (n == name) return values;
  }
  throw InvalidArgument("invariant '" + name + "' was not recorded");
}

Trajectory integrate(const HamiltonianSystem& sys, const HbvmTableau& t,
                     const Solver& solver, const State& y0, double t0, double h,
                     int n_steps,
                     const std::vector<std::string>& record_invariants) {
  if (n_steps < 0) throw InvalidArgument("number of steps must be >= 0");
  std::vector<HamiltonianSystem::ScalarFn> evaluators;
  Trajectory traj;
  traj.solver_tol = solver_tolerance(solver);
  for (const auto& name : record_invariants) {
    evaluators.push_back(sys.invariant(name));
    traj.invariant_series.emplace_back(name, std::vector<double>{});
  }
  // evaluate first so a DomainError leaves the series aligned
  auto record = [&](double time, const State& y) {
    std::vector<double> values;
    for (const auto& fn : evaluators) values.push_back(fn(y));
    traj.times.push_back(time);
    traj.states.push_back(y);
    for (std::size_t i = 0; i < values.size(); ++i) {
      traj.invariant_series[i].second.push_back(values[i]);
    }
  };

  record(t0, y0);
  State y = y0;
  for (int n = 1; n <= n_steps; ++n) {
    const double tn = t0 + (n - 1) * h;
    try {
      StepResult r = step(sys.field(), t, solver, y, tn, h);
      record(t0 + n * h, r.y1);
      y = std::move(r.y1);
      traj.iterations.push_back(r.stats.iterations);
    } catch (const StepFailure& e) {
      traj.failed = true;
      traj.failure = e.what();
      break;
    } catch (const DomainError& e) {
      traj.failed = true;
      traj.failure = e.what();
      break;
    }
  }
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const Eigen::Index dim = traj.states.empty() ? 0 : traj.states.front().size();
  os << 't';
  for (Eigen::Index i = 1; i <= dim; ++i) os << ",y_" << i;
  for (const auto& [name, values] : traj.invariant_series) os << ',' << name;
  os << '\n';
  for (std::size_t r = 0; r < traj.states.size(); ++r) {
    os << format_number(traj.times[r]);
    for (Eigen::Index i = 0; i < dim; ++i) {
      os << ',' << format_number(traj.states[r](i));
    }
    for (const auto& [name, values] : traj.invariant_series) {
      os << ',' << format_number(values[r]);
    }
    os << '\n';
  }
}

}  // namespace hbvm
