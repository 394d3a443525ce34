#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hbvm/hamiltonian.hpp"
#include "hbvm/tableau.hpp"

namespace hbvm {

/// Split of the abscissae into s fundamental (unknown) and n-s silent stages,
/// with the reduced block-s system data.
///
///   A1    = I_s2 I_s1^{-1}          silent stages from fundamental ones
///   u_hat = 1 - A1 1
///   B1    = I_s1 P_s1^T W_1,  B2 = I_s1 P_s2^T W_2
///   C     = B1 + B2 A1              same spectrum as X_s
struct Partition {
  std::vector<int> fundamental_idx;  // 0-based, ascending
  std::vector<int> silent_idx;       // 0-based, ascending
  Eigen::MatrixXd A1;
  Eigen::VectorXd u_hat;
  Eigen::MatrixXd B1;
  Eigen::MatrixXd B2;
  Eigen::MatrixXd C;
  /// False when n - s is odd: the nearest-node rule may pick an asymmetric set.
  bool symmetry_guaranteed = true;
};

enum class FundamentalSelection { rule_of_thumb, first_s };

/// Nearest-node rule: reference points j/(s+1), j = 1..s, each takes the
/// closest unused node (ties toward the smaller node). A node at t = 0 is
/// never fundamental since its stage is y0.
Partition select_fundamental(const HbvmTableau& t);

/// The first s nonzero abscissae as fundamental stages.
Partition first_s_partition(const HbvmTableau& t);

Partition make_partition(const HbvmTableau& t, FundamentalSelection how);

/// Partition with explicitly chosen fundamental indices (0-based).
Partition make_partition(const HbvmTableau& t, std::span<const int> fundamental);

struct BlendedConfig {
  double gamma = 0.0;
  double newton_tol = 1e-13;
  int max_outer = 50;
  int max_inner = 1;
};

struct GammaChoice {
  double gamma = 0.0;
  double rho_star = 0.0;
};

/// gamma = |mu_min| over the spectrum of C, rho* = 1 - cos Arg(mu_min).
GammaChoice optimal_gamma(const Eigen::MatrixXd& C);

/// Config with the optimal gamma of the partition's C.
BlendedConfig default_blended_config(const Partition& part);

/// Z(q) = q / (1 - gamma q)^2 C^{-1} (C - gamma I)^2.
Eigen::MatrixXcd amplification_matrix(const Eigen::MatrixXd& C, double gamma,
                                      std::complex<double> q);

/// I - theta(q) M(q) assembled from the blended formulation for y' = lambda y.
Eigen::MatrixXcd blended_iteration_matrix(const Eigen::MatrixXd& C,
                                          double gamma, std::complex<double> q);

/// max over q = i y, y in grid, of the spectral radius of Z(q).
double amplification_scan(const Eigen::MatrixXd& C, double gamma,
                          std::span<const double> grid);

/// n points logarithmically spaced on [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

struct StageSolution {
  std::vector<State> fundamental_stages;  // s stages in partition order
  std::vector<State> stages;              // all n stages in node order
  std::vector<State> stage_derivatives;   // f(stage_i), node order
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;     // max-norm of the block-s residual F(y1)
  double last_update = 0.0;  // max-norm of the last correction
};

/// Records an update norm and says whether to stop. Converged once an update
/// reaches tol (already scaled); sweeps then go on while updates still halve, so the stages
/// end near roundoff instead of near tol.
bool polish_done(StageSolution& out, double update, double tol,
                 const Eigen::MatrixXd& stages);

/// tol * max(1, |y0|_inf).
double scaled_tolerance(double tol, const State& y0);
/// Threshold used inside the stage solvers; also scales with the current
/// stage magnitudes, which can dwarf y0 over a long step.
double stage_tolerance(double tol, const State& y0, const Eigen::MatrixXd& stages);

/// Residual F(y1) of the block-s system, columns = fundamental stages.
Eigen::MatrixXd block_residual(const VectorField& field, const Partition& part,
                               const State& y0, double h,
                               const Eigen::MatrixXd& fundamental);

/// Blended iteration. Non-convergence is reported through `converged`.
/// Throws StepFailure if Phi = I - h gamma J0 is singular.
StageSolution solve_stages(const VectorField& field, const HbvmTableau& t,
                           const Partition& part, const BlendedConfig& cfg,
                           const State& y0, double h);

/// Simplified Newton on the block-s system, (I - h C (x) J0) factored once.
StageSolution solve_stages_newton(const VectorField& field,
                                  const HbvmTableau& t, const Partition& part,
                                  const State& y0, double h, double tol,
                                  int max_iter);

}  // namespace hbvm
