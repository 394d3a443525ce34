// hbvm: command-line driver for HBVM(k,s) integrations and experiments.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "hbvm/errors.hpp"
#include "hbvm/harness.hpp"
#include "hbvm/integrator.hpp"
#include "hbvm/problems.hpp"
#include "hbvm/tableau.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitStepFailure = 2;

struct MethodOptions {
  std::string problem = "faou";
  int k = 2;
  int s = 2;
  std::string family = "gauss";
  std::string solver = "blended";
  double tol = 1e-13;
};

void add_method_options(CLI::App* cmd, MethodOptions& m) {
  cmd->add_option("--problem", m.problem, "faou, fpu, biot, sitnikov, harmonic")
      ->required();
  cmd->add_option("--k", m.k, "number of steps k (abscissae, k+1 for lobatto)");
  cmd->add_option("--s", m.s, "degree s of the method (order 2s)");
  cmd->add_option("--family", m.family, "gauss or lobatto");
  cmd->add_option("--solver", m.solver, "fixed, newton or blended");
  cmd->add_option("--tol", m.tol, "stage solver tolerance");
}

hbvm::MethodSpec to_method(const MethodOptions& m) {
  hbvm::MethodSpec spec;
  spec.k = m.k;
  spec.s = m.s;
  spec.family = hbvm::parse_node_family(m.family);
  if (spec.family == hbvm::NodeFamily::custom) {
    throw hbvm::InvalidArgument("the CLI supports the gauss and lobatto families");
  }
  spec.solver = hbvm::parse_solver_kind(m.solver);
  spec.tol = m.tol;
  return spec;
}

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw hbvm::InvalidArgument("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void emit(const hbvm::ExperimentReport& rep, bool json, const std::string& out) {
  Output o(out);
  if (json) {
    o.stream() << hbvm::report_to_json(rep).dump(2) << '\n';
  } else {
    hbvm::write_report_csv(o.stream(), rep);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian Boundary Value Methods HBVM(k,s)"};
  app.require_subcommand(1);
  // --h is the step size, so help is long-form only.
  app.set_help_flag("--help", "print this help message and exit");

  bool json = false;
  std::string out;
  MethodOptions method;
  double h = 0.1;
  int steps = 100;

  auto* integrate_cmd = app.add_subcommand("integrate", "integrate a problem");
  add_method_options(integrate_cmd, method);
  integrate_cmd->add_option("--h", h, "step size")->required();
  integrate_cmd->add_option("--steps", steps, "number of steps")->required();

  auto* drift_cmd = app.add_subcommand("drift", "energy drift study");
  add_method_options(drift_cmd, method);
  drift_cmd->add_option("--h", h, "step size")->required();
  drift_cmd->add_option("--steps", steps, "number of steps")->required();

  std::vector<double> h_list;
  double t_final = 0.0;
  auto* conv_cmd = app.add_subcommand("convergence", "observed order table");
  add_method_options(conv_cmd, method);
  conv_cmd->add_option("--h", h_list, "halving sequence of step sizes")
      ->required()
      ->expected(1, -1);
  conv_cmd->add_option("--t-final", t_final,
                       "final time (default: the problem's interval)");

  std::vector<int> k_list;
  auto* compare_cmd =
      app.add_subcommand("compare-kl", "Gauss vs Lobatto HBVM(k,s) differences");
  compare_cmd->add_option("--problem", method.problem, "faou, fpu, biot, sitnikov, harmonic")->required();
  compare_cmd->add_option("--s", method.s, "degree s of the method");
  compare_cmd->add_option("--k", k_list, "list of k values")->required()->expected(1, -1);
  compare_cmd->add_option("--h", h, "step size")->required();
  compare_cmd->add_option("--steps", steps, "number of steps")->required();
  compare_cmd->add_option("--solver", method.solver, "fixed, newton or blended");
  compare_cmd->add_option("--tol", method.tol, "stage solver tolerance");

  std::vector<int> s_list;
  int scan_points = 2000;
  auto* gamma_cmd = app.add_subcommand("gamma-table", "optimal blended parameters");
  gamma_cmd->add_option("--s", s_list, "list of s values")->required()->expected(1, -1);
  gamma_cmd->add_option("--scan-points", scan_points, "imaginary-axis scan resolution");

  int k_max = 100;
  std::string selection = "rule_of_thumb";
  auto* cond_cmd = app.add_subcommand("cond-sweep", "condition number of C(k,s)");
  cond_cmd->add_option("--s", s_list, "list of s values")->required()->expected(1, -1);
  cond_cmd->add_option("--k-max", k_max, "largest k, swept from k = s");
  cond_cmd->add_option("--selection", selection, "rule_of_thumb or first_s")
      ->check(CLI::IsMember({"rule_of_thumb", "first_s"}));

  auto* tableau_cmd = app.add_subcommand("tableau", "export a Butcher tableau as JSON");
  tableau_cmd->add_option("--k", method.k, "number of steps k")->required();
  tableau_cmd->add_option("--s", method.s, "degree s")->required();
  tableau_cmd->add_option("--family", method.family, "gauss or lobatto");

  for (auto* cmd : {integrate_cmd, drift_cmd, conv_cmd, compare_cmd, gamma_cmd,
                    cond_cmd, tableau_cmd}) {
    cmd->add_option("--out", out, "output file (default stdout)");
  }
  for (auto* cmd : {integrate_cmd, drift_cmd, conv_cmd, compare_cmd, gamma_cmd,
                    cond_cmd}) {
    cmd->add_flag("--json", json, "emit a JSON document instead of CSV");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*integrate_cmd) {
      const hbvm::ProblemSpec problem = hbvm::problem_by_name(method.problem);
      const hbvm::MethodSpec spec = to_method(method);
      const hbvm::HbvmTableau t = hbvm::build_hbvm(spec.k, spec.s, spec.family);
      const hbvm::Solver solver = hbvm::make_solver(spec.solver, t, spec.tol);
      std::vector<std::string> names{"H"};
      for (const auto& [name, fn] : problem.system.extra_invariants()) {
        names.push_back(name);
      }
      const hbvm::Trajectory traj = hbvm::integrate(
          problem.system, t, solver, problem.y0, 0.0, h, steps, names);
      Output o(out);
      if (json) {
        hbvm::ExperimentReport rep;
        rep.experiment_id = "integrate";
        rep.inputs["problem"] = problem.name;
        rep.inputs["method"] = spec.to_json();
        rep.inputs["h"] = h;
        rep.inputs["n_steps"] = steps;
        rep.columns.push_back("t");
        for (int i = 1; i <= problem.system.dim(); ++i) {
          rep.columns.push_back("y_" + std::to_string(i));
        }
        for (const auto& n : names) rep.columns.push_back(n);
        for (std::size_t j = 0; j < traj.states.size(); ++j) {
          std::vector<double> row{traj.times[j]};
          for (Eigen::Index i = 0; i < traj.states[j].size(); ++i) {
            row.push_back(traj.states[j](i));
          }
          for (const auto& [n, series] : traj.invariant_series) row.push_back(series[j]);
          rep.rows.push_back(std::move(row));
        }
        rep.summary["failed"] = traj.failed;
        if (traj.failed) rep.summary["failure"] = traj.failure;
        o.stream() << hbvm::report_to_json(rep).dump(2) << '\n';
      } else {
        hbvm::write_trajectory_csv(o.stream(), traj);
      }
      if (traj.failed) {
        std::cerr << "step failure: " << traj.failure << '\n';
        return kExitStepFailure;
      }
    } else if (*drift_cmd) {
      const auto rep = hbvm::drift_experiment(hbvm::problem_by_name(method.problem),
                                              to_method(method), h, steps);
      emit(rep, json, out);
      if (rep.summary.value("failed", false)) return kExitStepFailure;
    } else if (*conv_cmd) {
      const hbvm::ProblemSpec problem = hbvm::problem_by_name(method.problem);
      const double tf = t_final > 0.0 ? t_final : problem.default_t_final;
      emit(hbvm::convergence_table(problem, to_method(method), h_list, tf), json, out);
    } else if (*compare_cmd) {
      const auto rep = hbvm::gauss_lobatto_compare(
          hbvm::problem_by_name(method.problem), method.s, k_list, h, steps,
          hbvm::parse_solver_kind(method.solver), method.tol);
      emit(rep, json, out);
      if (rep.summary.value("failed", false)) return kExitStepFailure;
    } else if (*gamma_cmd) {
      emit(hbvm::gamma_table(s_list, scan_points), json, out);
    } else if (*cond_cmd) {
      const auto sel = selection == "first_s" ? hbvm::FundamentalSelection::first_s
                                              : hbvm::FundamentalSelection::rule_of_thumb;
      emit(hbvm::condition_sweep(s_list, k_max, sel), json, out);
    } else if (*tableau_cmd) {
      const auto t = hbvm::build_hbvm(method.k, method.s,
                                      hbvm::parse_node_family(method.family));
      Output o(out);
      o.stream() << hbvm::tableau_to_json(t) << '\n';
    }
  } catch (const hbvm::StepFailure& e) {
    std::cerr << "step failure: " << e.what() << '\n';
    return kExitStepFailure;
  } catch (const hbvm::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const hbvm::PreconditionViolation& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const hbvm::DomainError& e) {
    std::cerr << "step failure: " << e.what() << '\n';
    return kExitStepFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitOk;
}
