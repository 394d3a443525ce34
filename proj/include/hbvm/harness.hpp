#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hbvm/integrator.hpp"
#include "hbvm/problems.hpp"
#include "hbvm/quadrature.hpp"

namespace hbvm {

/// Method selection for experiment drivers: HBVM(k,s) on a node family with
/// one of the stage solvers.
struct MethodSpec {
  int k = 2;
  int s = 2;
  NodeFamily family = NodeFamily::gauss;
  SolverKind solver = SolverKind::blended;
  double tol = 1e-13;

  std::string label() const;
  nlohmann::ordered_json to_json() const;
};

/// Tabular result of one experiment. `rows` follow `columns`; `summary`
/// holds scalar findings; `metadata` holds run information (wall time) that
/// is kept out of the CSV so CSV output stays byte-identical across runs.
struct ExperimentReport {
  std::string experiment_id;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  /// Column by name; throws InvalidArgument if absent.
  std::vector<double> column(const std::string& name) const;
};

void write_report_csv(std::ostream& os, const ExperimentReport& report);
/// {experiment_id, inputs, rows: [{col: value}], summary, metadata}.
nlohmann::ordered_json report_to_json(const ExperimentReport& report);

/// Least-squares slope of values against their index.
double regression_slope(const std::vector<double>& values);

/// Per-step H(y_j) - H(y_0) (and extra invariant deltas). Summary holds
/// max_abs_dH, the regression slope of |dH| against the step index, the
/// drift flag and whether the error sits at the solver floor (every
/// single-step change of H within the scaled solver tolerance).
ExperimentReport drift_experiment(const ProblemSpec& problem,
                                  const MethodSpec& method, double h,
                                  int n_steps);

/// e(h) = |y_h(T) - y_ref(T)|_2 with y_ref from the same method at h_min/8,
/// and observed orders log2(e(h_i)/e(h_{i+1})).
ExperimentReport convergence_table(const ProblemSpec& problem,
                                   const MethodSpec& method,
                                   const std::vector<double>& h_list,
                                   double t_final);

/// For each k: max over the trajectory of |y_gauss - y_lobatto|_inf.
ExperimentReport gauss_lobatto_compare(const ProblemSpec& problem, int s,
                                       const std::vector<int>& k_list, double h,
                                       int n_steps,
                                       SolverKind solver = SolverKind::blended,
                                       double tol = 1e-13);

/// Rows (s, gamma, rho*, rho* from a numeric scan of the imaginary axis).
ExperimentReport gamma_table(const std::vector<int>& s_list,
                             int scan_points = 2000);

/// Rows (s, k, cond_2(C(k,s))) for k = s..k_max.
ExperimentReport condition_sweep(const std::vector<int>& s_list, int k_max,
                                 FundamentalSelection selection);

/// 2-norm condition number.
double condition_number(const Eigen::MatrixXd& m);

}  // namespace hbvm
