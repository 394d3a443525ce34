#include "hbvm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "hbvm/errors.hpp"
#include "hbvm/tableau.hpp"

namespace hbvm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

HbvmTableau tableau_for(const MethodSpec& m) {
  return build_hbvm(m.k, m.s, m.family);
}

Trajectory run(const ProblemSpec& problem, const MethodSpec& method, double h,
               int n_steps, const std::vector<std::string>& invariants = {}) {
  const HbvmTableau t = tableau_for(method);
  const Solver solver = make_solver(method.solver, t, method.tol);
  return integrate(problem.system, t, solver, problem.y0, 0.0, h, n_steps,
                   invariants);
}

int steps_for(double t_final, double h) {
  const double n = t_final / h;
  const double rounded = std::round(n);
  if (rounded < 1.0 || std::abs(n - rounded) > 1e-9 * std::max(1.0, n)) {
    throw InvalidArgument("T_final = " + format_number(t_final) +
                          " is not a multiple of h = " + format_number(h));
  }
  return static_cast<int>(rounded);
}

nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string MethodSpec::label() const {
  return "HBVM(" + std::to_string(k) + "," + std::to_string(s) + ")-" +
         std::string(to_string(family)) + "-" + std::string(to_string(solver));
}

nlohmann::ordered_json MethodSpec::to_json() const {
  nlohmann::ordered_json j;
  j["k"] = k;
  j["s"] = s;
  j["family"] = std::string(to_string(family));
  j["solver"] = std::string(to_string(solver));
  j["tol"] = tol;
  return j;
}

std::vector<double> ExperimentReport::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) {
    throw InvalidArgument("report has no column '" + name + "'");
  }
  const auto idx = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[idx]);
  return out;
}

void write_report_csv(std::ostream& os, const ExperimentReport& report) {
  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    if (i) os << ',';
    os << report.columns[i];
  }
  os << '\n';
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      if (std::isfinite(row[i])) os << format_number(row[i]);
    }
    os << '\n';
  }
}

nlohmann::ordered_json report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["experiment_id"] = report.experiment_id;
  j["inputs"] = report.inputs;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    for (std::size_t i = 0; i < row.size(); ++i) {
      r[report.columns[i]] = number_or_null(row[i]);
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  j["summary"] = report.summary;
  j["metadata"] = report.metadata;
  return j;
}

double regression_slope(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double mean_x = (n - 1) / 2.0;
  double mean_y = 0.0;
  for (double v : values) mean_y += v;
  mean_y /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - mean_x;
    sxy += dx * (values[i] - mean_y);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ExperimentReport drift_experiment(const ProblemSpec& problem,
                                  const MethodSpec& method, double h,
                                  int n_steps) {
  const auto start = Clock::now();
  std::vector<std::string> names{"H"};
  for (const auto& [name, fn] : problem.system.extra_invariants()) {
    names.push_back(name);
  }
  const Trajectory traj = run(problem, method, h, n_steps, names);

  ExperimentReport rep;
  rep.experiment_id = "drift";
  rep.inputs["problem"] = problem.name;
  rep.inputs["method"] = method.to_json();
  rep.inputs["h"] = h;
  rep.inputs["n_steps"] = n_steps;
  rep.columns = {"step", "t"};
  for (const auto& n : names) {
    rep.columns.push_back(n);
    rep.columns.push_back("d" + n);
  }

  std::vector<double> abs_dh;
  for (std::size_t j = 0; j < traj.states.size(); ++j) {
    std::vector<double> row{static_cast<double>(j), traj.times[j]};
    for (const auto& [name, series] : traj.invariant_series) {
      row.push_back(series[j]);
      row.push_back(series[j] - series[0]);
    }
    abs_dh.push_back(std::abs(traj.invariant_series[0].second[j] -
                              traj.invariant_series[0].second[0]));
    rep.rows.push_back(std::move(row));
  }

  // A zero-step run reports an empty series.
  const std::size_t steps = traj.steps();
  if (steps == 0) {
    abs_dh.clear();
    rep.rows.clear();
  }
  const double max_dh =
      abs_dh.empty() ? 0.0 : *std::max_element(abs_dh.begin(), abs_dh.end());
  const double slope = regression_slope(abs_dh);
  // The floor is judged per step: each step may move H by up to the
  // solver tolerance, and those errors random-walk over a long run.
  const auto& hs = traj.invariant_series[0].second;
  double max_step_dh = 0.0;
  for (std::size_t j = 1; j < hs.size(); ++j) {
    max_step_dh = std::max(max_step_dh, std::abs(hs[j] - hs[j - 1]));
  }
  const double floor = scaled_tolerance(method.tol, problem.y0);
  const bool at_floor = max_step_dh <= floor;
  const bool drift =
      steps > 0 && !at_floor && slope > 1e-3 * (max_dh / static_cast<double>(steps));

  // Mean |dH| over the last tenth of the run relative to the first tenth.
  double ratio = 0.0;
  if (abs_dh.size() >= 20) {
    const std::size_t tenth = abs_dh.size() / 10;
    double early = 0.0;
    double late = 0.0;
    for (std::size_t i = 0; i < tenth; ++i) {
      early += abs_dh[i];
      late += abs_dh[abs_dh.size() - 1 - i];
    }
    ratio = early > 0.0 ? late / early : std::numeric_limits<double>::infinity();
  }

  rep.summary["max_abs_dH"] = max_dh;
  rep.summary["max_step_dH"] = max_step_dh;
  rep.summary["slope_abs_dH"] = slope;
  rep.summary["late_early_ratio"] = number_or_null(ratio);
  rep.summary["drift"] = drift;
  rep.summary["at_solver_floor"] = at_floor;
  rep.summary["solver_tol"] = method.tol;
  rep.summary["steps_completed"] = steps;
  rep.summary["failed"] = traj.failed;
  if (traj.failed) rep.summary["failure"] = traj.failure;
  rep.metadata["wall_time_s"] = seconds_since(start);
  return rep;
}

ExperimentReport convergence_table(const ProblemSpec& problem,
                                   const MethodSpec& method,
                                   const std::vector<double>& h_list,
                                   double t_final) {
  if (h_list.empty()) throw InvalidArgument("h list is empty");
  for (std::size_t i = 1; i < h_list.size(); ++i) {
    if (std::abs(h_list[i - 1] / h_list[i] - 2.0) > 1e-9) {
      throw InvalidArgument("h list must be a halving sequence");
    }
  }
  for (double h : h_list) steps_for(t_final, h);
  const auto start = Clock::now();

  const double h_ref = h_list.back() / 8.0;
  const Trajectory ref = run(problem, method, h_ref, steps_for(t_final, h_ref));
  if (ref.failed) {
    throw StepFailure("reference run failed: " + ref.failure, 0.0, 0);
  }
  const State y_ref = ref.states.back();

  ExperimentReport rep;
  rep.experiment_id = "convergence";
  rep.inputs["problem"] = problem.name;
  rep.inputs["method"] = method.to_json();
  rep.inputs["h_list"] = h_list;
  rep.inputs["t_final"] = t_final;
  rep.inputs["h_ref"] = h_ref;
  rep.columns = {"h", "steps", "error", "order"};

  double prev = std::numeric_limits<double>::quiet_NaN();
  for (double h : h_list) {
    const int n = steps_for(t_final, h);
    const Trajectory traj = run(problem, method, h, n);
    if (traj.failed) {
      throw StepFailure("run with h = " + format_number(h) +
                            " failed: " + traj.failure,
                        0.0, 0);
    }
    const double err = (traj.states.back() - y_ref).norm();
    const double order = std::isfinite(prev) ? std::log2(prev / err)
                                             : std::numeric_limits<double>::quiet_NaN();
    rep.rows.push_back({h, static_cast<double>(n), err, order});
    prev = err;
  }
  rep.summary["solver_tol"] = method.tol;
  rep.metadata["wall_time_s"] = seconds_since(start);
  return rep;
}

ExperimentReport gauss_lobatto_compare(const ProblemSpec& problem, int s,
                                       const std::vector<int>& k_list, double h,
                                       int n_steps, SolverKind solver,
                                       double tol) {
  const auto start = Clock::now();
  ExperimentReport rep;
  rep.experiment_id = "compare-kl";
  rep.inputs["problem"] = problem.name;
  rep.inputs["s"] = s;
  rep.inputs["k_list"] = k_list;
  rep.inputs["h"] = h;
  rep.inputs["n_steps"] = n_steps;
  rep.inputs["solver"] = std::string(to_string(solver));
  rep.columns = {"k", "max_diff"};
  bool failed = false;
  for (int k : k_list) {
    if (k < s) throw InvalidArgument("every k must satisfy k >= s");
    const MethodSpec g{k, s, NodeFamily::gauss, solver, tol};
    const MethodSpec l{k, s, NodeFamily::lobatto, solver, tol};
    const Trajectory tg = run(problem, g, h, n_steps);
    const Trajectory tl = run(problem, l, h, n_steps);
    failed = failed || tg.failed || tl.failed;
    const std::size_t n = std::min(tg.states.size(), tl.states.size());
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      worst = std::max(worst, (tg.states[j] - tl.states[j]).cwiseAbs().maxCoeff());
    }
    rep.rows.push_back({static_cast<double>(k), worst});
  }
  rep.summary["solver_tol"] = tol;
  rep.summary["failed"] = failed;
  rep.metadata["wall_time_s"] = seconds_since(start);
  return rep;
}

ExperimentReport gamma_table(const std::vector<int>& s_list, int scan_points) {
  const auto start = Clock::now();
  ExperimentReport rep;
  rep.experiment_id = "gamma-table";
  rep.inputs["s_list"] = s_list;
  rep.inputs["scan_points"] = scan_points;
  rep.columns = {"s", "gamma", "rho_star", "rho_star_scan"};
  const std::vector<double> grid = log_grid(1e-3, 1e3, scan_points);
  for (int s : s_list) {
    if (s < 2) throw InvalidArgument("gamma table needs s >= 2");
    // k = s: C is the Gauss matrix itself; its spectrum does not depend on k.
    const HbvmTableau t = build_hbvm(s, s, NodeFamily::gauss);
    const Partition p = select_fundamental(t);
    const GammaChoice g = optimal_gamma(p.C);
    const double scan = amplification_scan(p.C, g.gamma, grid);
    rep.rows.push_back({static_cast<double>(s), g.gamma, g.rho_star, scan});
  }
  rep.metadata["wall_time_s"] = seconds_since(start);
  return rep;
}

double condition_number(const Eigen::MatrixXd& m) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  return sv(0) / sv(sv.size() - 1);
}

ExperimentReport condition_sweep(const std::vector<int>& s_list, int k_max,
                                 FundamentalSelection selection) {
  const auto start = Clock::now();
  ExperimentReport rep;
  rep.experiment_id = "cond-sweep";
  rep.inputs["s_list"] = s_list;
  rep.inputs["k_max"] = k_max;
  rep.inputs["selection"] =
      selection == FundamentalSelection::rule_of_thumb ? "rule_of_thumb" : "first_s";
  rep.columns = {"s", "k", "cond"};
  for (int s : s_list) {
    if (k_max < s) throw InvalidArgument("k_max must be >= every s");
    for (int k = s; k <= k_max; ++k) {
      const HbvmTableau t = build_hbvm(k, s, NodeFamily::gauss);
      const Partition p = make_partition(t, selection);
      rep.rows.push_back({static_cast<double>(s), static_cast<double>(k),
                          condition_number(p.C)});
    }
  }
  rep.metadata["wall_time_s"] = seconds_since(start);
  return rep;
}

}  // namespace hbvm
