#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "hbvm/errors.hpp"
#include "hbvm/integrator.hpp"
#include "hbvm/problems.hpp"

using namespace hbvm;

namespace {

double max_abs_delta(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x - v.front()));
  return m;
}

double mean_abs(const std::vector<double>& v, std::size_t from, std::size_t to) {
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) acc += std::abs(v[i]);
  return acc / static_cast<double>(to - from);
}

}  // namespace

TEST_CASE("quadratic energy is conserved by Gauss-4") {
  const auto prob = harmonic_oscillator(1);
  const auto t = build_hbvm(2, 2, NodeFamily::gauss);
  const auto r = step(prob.system, t, make_solver(SolverKind::blended, t), prob.y0,
                      0.0, 0.1);
  CHECK(std::abs(prob.system.energy(r.y1) - prob.system.energy(prob.y0)) <= 1e-14);
}

TEST_CASE("HBVM(6,2) conserves the sextic energy in one step") {
  const auto prob = faou_problem();
  const auto t = build_hbvm(6, 2, NodeFamily::gauss);
  const auto r = step(prob.system, t, make_solver(SolverKind::blended, t), prob.y0,
                      0.0, 0.16);
  CHECK(std::abs(prob.system.energy(r.y1) - prob.system.energy(prob.y0)) <= 1e-13);
}

TEST_CASE("HBVM(k,1) has the midpoint stability function") {
  for (double lambda : {-1.0, -3.0, 0.5}) {
    Eigen::MatrixXd L(1, 1);
    L << lambda;
    const auto field = linear_field(L);
    State y0(1);
    y0 << 1.0;
    const double h = 0.1;
    const double q = h * lambda;
    for (int k = 1; k <= 6; ++k) {
      const auto t = build_hbvm(k, 1, NodeFamily::gauss);
      for (auto kind : {SolverKind::blended, SolverKind::fixed_point,
                        SolverKind::simplified_newton}) {
        const auto r = step(field, t, make_solver(kind, t), y0, 0.0, h);
        CHECK(std::abs(r.y1(0) - (1 + q / 2) / (1 - q / 2)) <= 1e-13);
      }
    }
  }
}

TEST_CASE("FPU energy over 2000 steps") {
  const auto prob = fpu_problem();
  const auto t = build_hbvm(4, 2, NodeFamily::gauss);
  const auto traj = integrate(prob.system, t, make_solver(SolverKind::blended, t),
                              prob.y0, 0.0, 0.05, 2000);
  REQUIRE_FALSE(traj.failed);
  CHECK(traj.steps() == 2000);
  CHECK(max_abs_delta(traj.series("H")) <= 1e-10);
}

TEST_CASE("Lobatto IIIA-4 energy drift on the sextic problem") {
  const auto prob = faou_problem();
  const auto t = build_hbvm(2, 2, NodeFamily::lobatto);
  const auto traj = integrate(prob.system, t, make_solver(SolverKind::blended, t),
                              prob.y0, 0.0, 0.16, 10000);
  REQUIRE_FALSE(traj.failed);
  const auto& H = traj.series("H");
  const std::size_t tenth = H.size() / 10;
  const double early = mean_abs(H, 1, tenth + 1);
  const double late = mean_abs(H, H.size() - tenth, H.size());
  CAPTURE(early);
  CAPTURE(late);
  CHECK(late > 10.0 * early);
}

TEST_CASE("zero steps") {
  const auto prob = biot_problem();
  const auto t = build_hbvm(3, 2, NodeFamily::gauss);
  const auto traj = integrate(prob.system, t, make_solver(SolverKind::blended, t),
                              prob.y0, 1.5, 0.1, 0);
  CHECK(traj.steps() == 0);
  REQUIRE(traj.states.size() == 1);
  CHECK(traj.times == std::vector<double>{1.5});
  CHECK((traj.states[0].array() == prob.y0.array()).all());
  CHECK(traj.iterations.empty());
  CHECK_FALSE(traj.failed);
}

TEST_CASE("trajectory bookkeeping") {
  const auto prob = faou_problem();
  const auto t = build_hbvm(4, 2, NodeFamily::gauss);
  const auto traj = integrate(prob.system, t, make_solver(SolverKind::blended, t),
                              prob.y0, 0.0, 0.16, 50);
  REQUIRE(traj.states.size() == 51);
  CHECK((traj.states[0].array() == prob.y0.array()).all());
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    CHECK(traj.times[i] > traj.times[i - 1]);
    CHECK(traj.times[i] == doctest::Approx(0.16 * i).epsilon(1e-15));
  }
  CHECK(traj.iterations.size() == 50);
  CHECK(traj.solver_tol == 1e-13);
  CHECK(traj.series("H").size() == 51);
  CHECK_THROWS_AS(traj.series("angular_momentum"), InvalidArgument);
  CHECK_THROWS_AS(integrate(prob.system, t, make_solver(SolverKind::blended, t),
                            prob.y0, 0.0, 0.16, -1),
                  InvalidArgument);
  CHECK_THROWS_AS(integrate(prob.system, t, make_solver(SolverKind::blended, t),
                            prob.y0, 0.0, 0.16, 3, {"nope"}),
                  InvalidArgument);
}

TEST_CASE("dense output") {
  const auto prob = biot_problem();
  const auto t = build_hbvm(6, 2, NodeFamily::gauss);
  const auto r = step(prob.system, t, make_solver(SolverKind::blended, t), prob.y0,
                      0.0, 0.1);
  CHECK((dense_eval(r.dense, 0.0).array() == prob.y0.array()).all());
  CHECK((dense_eval(r.dense, 1.0) - r.y1).cwiseAbs().maxCoeff() <= 1e-12);
  const double tol = 10 * scaled_tolerance(1e-13, prob.y0);
  for (int i = 0; i < t.stages(); ++i) {
    CHECK((dense_eval(r.dense, t.nodes()[i]) - r.stages[i]).cwiseAbs().maxCoeff() <=
          tol);
  }
  CHECK(r.dense.gamma_coeffs.size() == 2);
  CHECK_THROWS_AS(dense_eval(r.dense, -0.01), InvalidArgument);
  CHECK_THROWS_AS(dense_eval(r.dense, 1.01), InvalidArgument);
}

TEST_CASE("polynomial energies are conserved when k >= nu s / 2") {
  const auto faou = faou_problem();
  const auto fpu = fpu_problem();
  for (int s = 1; s <= 3; ++s) {
    for (const auto* prob : {&faou, &fpu}) {
      const int k = std::max(s, (*prob->polynomial_degree * s + 1) / 2);
      CAPTURE(prob->name);
      CAPTURE(s);
      const auto t = build_hbvm(k, s, NodeFamily::gauss);
      const auto traj =
          integrate(prob->system, t, make_solver(SolverKind::blended, t), prob->y0,
                    0.0, prob->default_h * 0.5, 20);
      REQUIRE_FALSE(traj.failed);
      const auto& H = traj.series("H");
      const double bound = 1e-12 * (1 + std::abs(H[0]));
      for (std::size_t i = 1; i < H.size(); ++i) {
        CHECK(std::abs(H[i] - H[i - 1]) <= bound);
      }
    }
  }
}

TEST_CASE("order 2s on the harmonic oscillator") {
  const auto prob = harmonic_oscillator(1);
  for (int s = 1; s <= 3; ++s) {
    for (int k : {s, s + 2}) {
      const auto t = build_hbvm(k, s, NodeFamily::gauss);
      const double T = 3.2;
      double prev = 0.0;
      for (int n : {8, 16, 32}) {
        const auto traj = integrate(prob.system, t,
                                    make_solver(SolverKind::blended, t), prob.y0,
                                    0.0, T / n, n);
        const double err = (traj.states.back() - harmonic_exact(prob.y0, T)).norm();
        if (prev > 0.0) {
          CAPTURE(s);
          CAPTURE(k);
          CHECK(std::abs(std::log2(prev / err) - 2 * s) <= 0.3);
        }
        prev = err;
      }
    }
  }
}

TEST_CASE("forward then backward step returns to y0") {
  for (const auto& prob : {faou_problem(), biot_problem()}) {
    const auto t = build_hbvm(6, 2, NodeFamily::gauss);
    REQUIRE(t.symmetric_nodes());
    const auto solver = make_solver(SolverKind::blended, t);
    const double h = prob.default_h;
    const auto fwd = step(prob.system, t, solver, prob.y0, 0.0, h);
    const auto back = step(prob.system, t, solver, fwd.y1, h, -h);
    CAPTURE(prob.name);
    CHECK((back.y1 - prob.y0).cwiseAbs().maxCoeff() <=
          10 * scaled_tolerance(1e-13, prob.y0));
  }
}

TEST_CASE("the three solvers agree") {
  for (const auto& name : problem_names()) {
    const auto prob = problem_by_name(name);
    for (auto fam : {NodeFamily::gauss, NodeFamily::lobatto}) {
      const auto t = build_hbvm(5, 2, fam);
      const double h = prob.default_h * 0.5;
      const auto a = step(prob.system, t, make_solver(SolverKind::blended, t),
                          prob.y0, 0.0, h);
      const auto b = step(prob.system, t, make_solver(SolverKind::fixed_point, t),
                          prob.y0, 0.0, h);
      const auto c = step(prob.system, t,
                          make_solver(SolverKind::simplified_newton, t), prob.y0,
                          0.0, h);
      const double tol = 100 * scaled_tolerance(1e-13, prob.y0);
      CAPTURE(name);
      CHECK((a.y1 - b.y1).cwiseAbs().maxCoeff() <= tol);
      CHECK((a.y1 - c.y1).cwiseAbs().maxCoeff() <= tol);
    }
  }
}

TEST_CASE("step failures") {
  const auto prob = faou_problem();
  const auto t = build_hbvm(6, 2, NodeFamily::gauss);
  const Solver starved = FixedPointSolver{1e-13, 1};
  try {
    step(prob.system, t, starved, prob.y0, 0.0, 0.16);
    FAIL("expected a step failure");
  } catch (const StepFailure& e) {
    CHECK(e.last_residual() > 0.0);
    CHECK(e.iterations() == 1);
  }
  const auto traj = integrate(prob.system, t, starved, prob.y0, 0.0, 0.16, 10);
  CHECK(traj.failed);
  CHECK(traj.steps() == 0);
  CHECK_FALSE(traj.failure.empty());

  State wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(step(prob.system, t, starved, wrong, 0.0, 0.1), InvalidArgument);
}

TEST_CASE("domain errors stop the trajectory") {
  // oscillator whose energy is only defined for q > 0.5
  auto guard = [](const State& y) {
    if (y(0) <= 0.5) throw DomainError("left the half-plane q > 0.5");
  };
  const HamiltonianSystem sys(
      2,
      [guard](const State& y) {
        guard(y);
        return 0.5 * y.squaredNorm();
      },
      [guard](const State& y) {
        guard(y);
        return State(y);
      });
  const auto t = build_hbvm(2, 2, NodeFamily::gauss);
  const State y0 = State::Unit(2, 0);
  const auto traj =
      integrate(sys, t, make_solver(SolverKind::blended, t), y0, 0.0, 0.25, 20);
  CHECK(traj.failed);
  CHECK(traj.failure.find("half-plane") != std::string::npos);
  CHECK(traj.steps() >= 1);
  CHECK(traj.steps() < 20);
  CHECK(traj.series("H").size() == traj.states.size());
  CHECK(traj.states.back()(0) > 0.5);

  // an invalid initial state is the caller's error
  const auto biot = biot_problem();
  State at_axis = biot.y0;
  at_axis(0) = 0.0;
  at_axis(1) = 0.0;
  CHECK_THROWS_AS(integrate(biot.system, t, make_solver(SolverKind::blended, t),
                            at_axis, 0.0, 0.1, 5),
                  DomainError);
}

TEST_CASE("solver names") {
  CHECK(parse_solver_kind("fixed") == SolverKind::fixed_point);
  CHECK(parse_solver_kind("newton") == SolverKind::simplified_newton);
  CHECK(parse_solver_kind("blended") == SolverKind::blended);
  CHECK(to_string(SolverKind::simplified_newton) == "newton");
  CHECK_THROWS_AS(parse_solver_kind("gmres"), InvalidArgument);
  const auto t = build_hbvm(4, 2, NodeFamily::gauss);
  CHECK(solver_tolerance(make_solver(SolverKind::blended, t, 1e-10)) == 1e-10);
  CHECK(solver_tolerance(make_solver(SolverKind::fixed_point, t, 1e-11)) == 1e-11);
}

TEST_CASE("trajectory CSV") {
  const auto prob = harmonic_oscillator(1);
  const auto t = build_hbvm(2, 2, NodeFamily::gauss);
  const auto traj = integrate(prob.system, t, make_solver(SolverKind::blended, t),
                              prob.y0, 0.0, 0.5, 2);
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,y_1,y_2,H");
  std::getline(is, line);
  CHECK(line == "0,1,0,0.5");
  std::getline(is, line);
  CHECK(line.rfind("0.5,", 0) == 0);
  // 17 significant digits
  const auto comma = line.find(',', 4);
  CHECK(line.substr(4, comma - 4).size() >= 18);
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 1);
}
