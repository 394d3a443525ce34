#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "hbvm/blended.hpp"
#include "hbvm/format.hpp"
#include "hbvm/hamiltonian.hpp"
#include "hbvm/tableau.hpp"

namespace hbvm {

/// Plain fixed-point sweeps on the full n-stage system y = e (x) y0 + h A f(y).
struct FixedPointSolver {
  double tol = 1e-13;
  int max_sweeps = 200;
};

struct SimplifiedNewtonSolver {
  Partition partition;
  double tol = 1e-13;
  int max_iter = 50;
};

struct BlendedSolver {
  Partition partition;
  BlendedConfig config;
};

using Solver = std::variant<FixedPointSolver, SimplifiedNewtonSolver, BlendedSolver>;

enum class SolverKind { fixed_point, simplified_newton, blended };

/// "fixed", "newton" or "blended".
SolverKind parse_solver_kind(std::string_view name);
std::string_view to_string(SolverKind kind);

/// Solver of the given kind with the nearest-node partition and the optimal
/// blended parameter.
Solver make_solver(SolverKind kind, const HbvmTableau& t, double tol = 1e-13);
double solver_tolerance(const Solver& solver);

/// sigma(t0 + tau h) = y0 + h sum_j gamma_j int_0^tau P_j.
struct DenseOutput {
  std::vector<State> gamma_coeffs;
  State y0;
  double t0 = 0.0;
  double h = 0.0;
};

State dense_eval(const DenseOutput& d, double tau);

struct StepStats {
  int iterations = 0;
  double residual = 0.0;
};

struct StepResult {
  State y1;
  DenseOutput dense;
  StepStats stats;
  std::vector<State> stages;  // node order
};

/// One HBVM step. Throws StepFailure if the solver does not converge.
StepResult step(const VectorField& field, const HbvmTableau& t,
                const Solver& solver, const State& y0, double t0, double h);

inline StepResult step(const HamiltonianSystem& sys, const HbvmTableau& t,
                       const Solver& solver, const State& y0, double t0,
                       double h) {
  return step(sys.field(), t, solver, y0, t0, h);
}

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<std::pair<std::string, std::vector<double>>> invariant_series;
  std::vector<int> iterations;  // per step
  bool failed = false;
  std::string failure;
  double solver_tol = 0.0;

  std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
  const std::vector<double>& series(const std::string& name) const;
};

/// n_steps fixed steps of size h. A step failure stops the loop and leaves
/// the partial trajectory with `failed` set.
Trajectory integrate(const HamiltonianSystem& sys, const HbvmTableau& t,
                     const Solver& solver, const State& y0, double t0, double h,
                     int n_steps,
                     const std::vector<std::string>& record_invariants = {"H"});

/// Header `t,y_1..y_2m,<invariants>`, one row per state, 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace hbvm
