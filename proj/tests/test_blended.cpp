#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hbvm/blended.hpp"
#include "hbvm/errors.hpp"
#include "hbvm/harness.hpp"
#include "hbvm/integrator.hpp"
#include "hbvm/legendre.hpp"
#include "hbvm/problems.hpp"

using namespace hbvm;

namespace {

std::vector<std::complex<double>> sorted_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  std::vector<std::complex<double>> v(es.eigenvalues().data(),
                                      es.eigenvalues().data() + m.rows());
  sort_spectrum(v);
  return v;
}

Eigen::MatrixXd select(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
  return out;
}

double max_abs(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double spectral_radius(const Eigen::MatrixXcd& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("rule-of-thumb selection on Gauss-6") {
  const auto t = build_hbvm(6, 2, NodeFamily::gauss);
  const auto p = select_fundamental(t);
  CHECK(p.fundamental_idx == std::vector<int>{2, 3});
  CHECK(p.silent_idx == std::vector<int>{0, 1, 4, 5});
  CHECK(p.symmetry_guaranteed);
  CHECK(std::abs(t.nodes()[2] - 0.38069040695840154568) < 1e-15);
}

TEST_CASE("no silent stages when k = s") {
  const auto t = build_hbvm(2, 2, NodeFamily::gauss);
  const auto p = select_fundamental(t);
  CHECK(p.fundamental_idx == std::vector<int>{0, 1});
  CHECK(p.silent_idx.empty());
  CHECK(p.A1.rows() == 0);
  CHECK(p.B2.cols() == 0);
  CHECK((p.C - p.B1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((p.C - t.A).cwiseAbs().maxCoeff() < 1e-15);
  const auto f = first_s_partition(t);
  CHECK(condition_number(f.C) == doctest::Approx(condition_number(p.C)));
}

TEST_CASE("forcing the first nodes worsens conditioning") {
  const auto t = build_hbvm(6, 2, NodeFamily::gauss);
  const std::vector<int> first{0, 1};
  const auto forced = make_partition(t, first);
  const auto rule = select_fundamental(t);
  CHECK(condition_number(forced.C) > condition_number(rule.C));
  const auto fs = make_partition(t, FundamentalSelection::first_s);
  CHECK(fs.fundamental_idx == first);
}

TEST_CASE("odd k - s drops the symmetry guarantee") {
  const auto p = select_fundamental(build_hbvm(5, 2, NodeFamily::gauss));
  CHECK_FALSE(p.symmetry_guaranteed);
  CHECK(p.fundamental_idx.size() == 2);
}

TEST_CASE("the t = 0 abscissa is never fundamental") {
  for (int k = 1; k <= 10; ++k) {
    const auto t = build_hbvm(k, 1, NodeFamily::lobatto);
    const auto p = select_fundamental(t);
    CHECK(t.nodes()[p.fundamental_idx[0]] > 0.0);
    const auto f = first_s_partition(t);
    CHECK(f.fundamental_idx[0] == 1);
  }
  // k = s lobatto: one node is 0, the other s are fundamental
  const auto t = build_hbvm(3, 3, NodeFamily::lobatto);
  const auto p = select_fundamental(t);
  CHECK(p.silent_idx == std::vector<int>{0});
}

TEST_CASE("partition invariants") {
  for (int s = 1; s <= 5; ++s) {
    for (int k = s; k <= 16; ++k) {
      for (auto fam : {NodeFamily::gauss, NodeFamily::lobatto}) {
        CAPTURE(s);
        CAPTURE(k);
        const auto t = build_hbvm(k, s, fam);
        const auto p = select_fundamental(t);
        const Eigen::MatrixXd I1 = select(t.I_mat, p.fundamental_idx);
        const Eigen::MatrixXd I2 = select(t.I_mat, p.silent_idx);
        CHECK(max_abs(p.A1 * I1 - I2) < 1e-12);
        const Eigen::VectorXd u = Eigen::VectorXd::Ones(p.silent_idx.size());
        CHECK(max_abs(p.u_hat - (u - p.A1 * Eigen::VectorXd::Ones(s))) < 1e-15);
        CHECK(max_abs(p.C - (p.B1 + p.B2 * p.A1)) < 1e-15);
      }
    }
  }
}

TEST_CASE("C is isospectral to X_s") {
  for (int s = 2; s <= 5; ++s) {
    const auto ref = gauss_spectrum(s);
    for (int k = s; k <= 30; ++k) {
      CAPTURE(s);
      CAPTURE(k);
      const auto p = select_fundamental(build_hbvm(k, s, NodeFamily::gauss));
      const auto ev = sorted_eigenvalues(p.C);
      for (int i = 0; i < s; ++i) CHECK(std::abs(ev[i] - ref[i]) < 1e-9);
    }
  }
}

TEST_CASE("explicit partition errors") {
  const auto t = build_hbvm(4, 2, NodeFamily::gauss);
  const std::vector<int> one{1};
  const std::vector<int> out_of_range{1, 4};
  const std::vector<int> dup{1, 1};
  const std::vector<int> negative{-1, 2};
  CHECK_THROWS_AS(make_partition(t, one), InvalidArgument);
  CHECK_THROWS_AS(make_partition(t, out_of_range), InvalidArgument);
  CHECK_THROWS_AS(make_partition(t, dup), InvalidArgument);
  CHECK_THROWS_AS(make_partition(t, negative), InvalidArgument);
  // node 0 of a Lobatto set gives a zero row in the integral block
  const auto l = build_hbvm(3, 2, NodeFamily::lobatto);
  const std::vector<int> with_zero{0, 2};
  CHECK_THROWS_AS(make_partition(l, with_zero), InternalError);
}

TEST_CASE("optimal gamma") {
  auto g = optimal_gamma(select_fundamental(build_hbvm(2, 2, NodeFamily::gauss)).C);
  CHECK(std::abs(g.gamma - 0.2886751346) < 5e-5);
  CHECK(std::abs(g.rho_star - 0.1339745962) < 5e-5);
  g = optimal_gamma(structural_matrices(5).xs);
  CHECK(std::abs(g.gamma - 0.1173) < 5e-5);
  CHECK(std::abs(g.rho_star - 0.4544) < 5e-5);
  g = optimal_gamma(structural_matrices(10).xs);
  CHECK(std::abs(g.gamma - 0.0568) < 5e-5);
  CHECK(std::abs(g.rho_star - 0.6467) < 5e-5);
  // X_1 has a single real eigenvalue
  g = optimal_gamma(structural_matrices(1).xs);
  CHECK(g.gamma == doctest::Approx(0.5));
  CHECK(g.rho_star == doctest::Approx(0.0));

  CHECK_THROWS_AS(optimal_gamma(Eigen::MatrixXd::Zero(2, 2)), InvalidArgument);
  CHECK_THROWS_AS(optimal_gamma(Eigen::MatrixXd::Ones(2, 3)), InvalidArgument);
  CHECK_THROWS_AS(optimal_gamma(Eigen::MatrixXd(0, 0)), InvalidArgument);
  const auto cfg =
      default_blended_config(select_fundamental(build_hbvm(6, 2, NodeFamily::gauss)));
  CHECK(cfg.gamma == doctest::Approx(0.2886751346).epsilon(1e-8));
  CHECK(cfg.max_inner == 1);
  CHECK(cfg.max_outer == 50);
  CHECK(cfg.newton_tol == 1e-13);
}

TEST_CASE("amplification scan") {
  const auto C2 = select_fundamental(build_hbvm(2, 2, NodeFamily::gauss)).C;
  const auto g2 = optimal_gamma(C2);
  const auto grid = log_grid(1e-3, 1e3, 200);
  CHECK(std::abs(amplification_scan(C2, g2.gamma, grid) - 0.1340) <= 1e-3);

  // Z vanishes at q = 0 and at infinity
  const std::vector<double> tiny{1e-9};
  CHECK(amplification_scan(C2, g2.gamma, tiny) < 1e-8);
  const std::vector<double> huge{1e9};
  CHECK(amplification_scan(C2, g2.gamma, huge) < 1e-8);

  const auto C3 = select_fundamental(build_hbvm(3, 3, NodeFamily::gauss)).C;
  CHECK(amplification_scan(C3, 0.5, grid) > 0.2765);

  const std::vector<double> bad{0.0};
  const std::vector<double> empty;
  CHECK_THROWS_AS(amplification_scan(C2, g2.gamma, bad), InvalidArgument);
  CHECK_THROWS_AS(amplification_scan(C2, g2.gamma, empty), InvalidArgument);
  CHECK_THROWS_AS(amplification_scan(C2, 0.0, grid), InvalidArgument);
}

TEST_CASE("scan agrees with the analytic factor") {
  const auto grid = log_grid(1e-3, 1e3, 2000);
  for (int s = 2; s <= 6; ++s) {
    const auto C = select_fundamental(build_hbvm(s + 2, s, NodeFamily::gauss)).C;
    const auto g = optimal_gamma(C);
    CHECK(std::abs(amplification_scan(C, g.gamma, grid) - g.rho_star) <= 1e-3);
  }
}

TEST_CASE("blended iteration matrix equals Z(q)") {
  for (int s = 1; s <= 5; ++s) {
    const auto C = select_fundamental(build_hbvm(s + 4, s, NodeFamily::gauss)).C;
    const double gamma = optimal_gamma(C).gamma;
    for (std::complex<double> q : {std::complex<double>(0.0, 0.3),
                                   std::complex<double>(-2.0, 1.0),
                                   std::complex<double>(-0.01, 0.0),
                                   std::complex<double>(0.0, 40.0)}) {
      const Eigen::MatrixXcd diff =
          blended_iteration_matrix(C, gamma, q) - amplification_matrix(C, gamma, q);
      CHECK(diff.cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(spectral_radius(amplification_matrix(C, gamma, 0.0)) == 0.0);
  }
}

TEST_CASE("log grid") {
  const auto g = log_grid(1e-3, 1e3, 7);
  REQUIRE(g.size() == 7);
  CHECK(g.front() == doctest::Approx(1e-3));
  CHECK(g[3] == doctest::Approx(1.0));
  CHECK(g.back() == doctest::Approx(1e3));
  CHECK(log_grid(2.0, 2.0, 1) == std::vector<double>{2.0});
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 5), InvalidArgument);
  CHECK_THROWS_AS(log_grid(2.0, 1.0, 5), InvalidArgument);
  CHECK_THROWS_AS(log_grid(1.0, 2.0, 0), InvalidArgument);
}

TEST_CASE("scalar linear test equation") {
  Eigen::MatrixXd L(1, 1);
  L << -1.0;
  const auto field = linear_field(L);
  const auto t = build_hbvm(1, 1, NodeFamily::gauss);
  const auto p = select_fundamental(t);
  const auto cfg = default_blended_config(p);
  State y0(1);
  y0 << 1.0;
  const double h = 0.1;
  const double q = -h;
  const auto sol = solve_stages(field, t, p, cfg, y0, h);
  CHECK(sol.converged);
  CHECK(sol.iterations <= 3);
  // midpoint stage Y = y0 / (1 - q/2)
  CHECK(std::abs(sol.stages[0](0) - 1.0 / (1.0 - q / 2)) < 1e-14);
  CHECK(std::abs(sol.stage_derivatives[0](0) + sol.stages[0](0)) < 1e-15);
}

TEST_CASE("harmonic oscillator block residual") {
  const auto prob = harmonic_oscillator(1);
  const auto t = build_hbvm(4, 2, NodeFamily::gauss);
  const auto p = select_fundamental(t);
  const auto sol = solve_stages(prob.system.field(), t, p, default_blended_config(p),
                                prob.y0, 0.1);
  REQUIRE(sol.converged);
  Eigen::MatrixXd fund(2, 2);
  fund.col(0) = sol.fundamental_stages[0];
  fund.col(1) = sol.fundamental_stages[1];
  const auto r = block_residual(prob.system.field(), p, prob.y0, 0.1, fund);
  CHECK(r.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(sol.stages.size() == 4);
}

TEST_CASE("blended stages match the fixed-point oracle") {
  for (const auto& name : problem_names()) {
    CAPTURE(name);
    const auto prob = problem_by_name(name);
    const auto t = build_hbvm(6, 2, NodeFamily::gauss);
    const double h = prob.default_h * 0.5;
    const auto blended = step(prob.system, t, make_solver(SolverKind::blended, t),
                              prob.y0, 0.0, h);
    const auto fixed = step(prob.system, t, FixedPointSolver{}, prob.y0, 0.0, h);
    const auto newton = step(prob.system, t,
                             make_solver(SolverKind::simplified_newton, t),
                             prob.y0, 0.0, h);
    for (std::size_t i = 0; i < blended.stages.size(); ++i) {
      CHECK((blended.stages[i] - fixed.stages[i]).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((newton.stages[i] - fixed.stages[i]).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("extra inner sweeps still converge") {
  const auto prob = faou_problem();
  const auto t = build_hbvm(6, 2, NodeFamily::gauss);
  const auto p = select_fundamental(t);
  auto cfg = default_blended_config(p);
  const auto one = solve_stages(prob.system.field(), t, p, cfg, prob.y0, 0.16);
  cfg.max_inner = 4;
  const auto four = solve_stages(prob.system.field(), t, p, cfg, prob.y0, 0.16);
  REQUIRE(one.converged);
  REQUIRE(four.converged);
  CHECK(four.iterations <= one.iterations);
  for (int i = 0; i < 2; ++i) {
    CHECK((one.fundamental_stages[i] - four.fundamental_stages[i])
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
}

TEST_CASE("non-convergence is reported, not thrown") {
  const auto prob = faou_problem();
  const auto t = build_hbvm(6, 2, NodeFamily::gauss);
  const auto p = select_fundamental(t);
  auto cfg = default_blended_config(p);
  cfg.max_outer = 1;
  const auto sol = solve_stages(prob.system.field(), t, p, cfg, prob.y0, 0.16);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 1);
  CHECK(sol.last_update > 0.0);
}

TEST_CASE("singular Phi is a step failure") {
  const auto t = build_hbvm(2, 2, NodeFamily::gauss);
  const auto p = select_fundamental(t);
  const auto cfg = default_blended_config(p);
  const double h = 0.5;
  const Eigen::MatrixXd L =
      Eigen::MatrixXd::Identity(2, 2) / (h * cfg.gamma);
  State y0 = State::Ones(2);
  CHECK_THROWS_AS(solve_stages(linear_field(L), t, p, cfg, y0, h), StepFailure);
  auto bad = cfg;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(solve_stages(linear_field(L), t, p, bad, y0, h), InvalidArgument);
}

TEST_CASE("scaled tolerance") {
  State y(3);
  y << 0.1, -20.0, 3.0;
  CHECK(scaled_tolerance(1e-13, y) == doctest::Approx(2e-12));
  y << 0.1, 0.2, 0.3;
  CHECK(scaled_tolerance(1e-13, y) == 1e-13);
}
