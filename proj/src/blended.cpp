#include "hbvm/blended.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "hbvm/errors.hpp"

namespace hbvm {

namespace {

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m,
                            const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

Eigen::VectorXd select_entries(const std::vector<double>& v,
                               const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = v[static_cast<std::size_t>(idx[i])];
  }
  return out;
}

Eigen::MatrixXd apply_field(const VectorField& field, const Eigen::MatrixXd& Y) {
  Eigen::MatrixXd out(Y.rows(), Y.cols());
  for (Eigen::Index j = 0; j < Y.cols(); ++j) {
    out.col(j) = field.f(Y.col(j));
  }
  return out;
}

// Stage values and derivatives of the whole abscissa set from the
// fundamental block.
struct StageBlocks {
  Eigen::MatrixXd silent;
  Eigen::MatrixXd f_fund;
  Eigen::MatrixXd f_silent;
};

StageBlocks evaluate_blocks(const VectorField& field, const Partition& part,
                            const State& y0, const Eigen::MatrixXd& fund) {
  StageBlocks b;
  b.silent = y0 * part.u_hat.transpose() + fund * part.A1.transpose();
  b.f_fund = apply_field(field, fund);
  b.f_silent = apply_field(field, b.silent);
  return b;
}

Eigen::MatrixXd residual_from_blocks(const Partition& part, const State& y0,
                                     double h, const Eigen::MatrixXd& fund,
                                     const StageBlocks& b) {
  const Eigen::Index s = fund.cols();
  Eigen::MatrixXd r = fund - y0 * Eigen::RowVectorXd::Ones(s);
  r -= h * (b.f_fund * part.B1.transpose());
  if (b.f_silent.cols() > 0) r -= h * (b.f_silent * part.B2.transpose());
  return r;
}

void finish(StageSolution& out, const VectorField& field,
            const Partition& part, const State& y0,
            const Eigen::MatrixXd& fund) {
  const StageBlocks b = evaluate_blocks(field, part, y0, fund);
  const std::size_t n = part.fundamental_idx.size() + part.silent_idx.size();
  out.stages.assign(n, State());
  out.stage_derivatives.assign(n, State());
  out.fundamental_stages.clear();
  for (std::size_t i = 0; i < part.fundamental_idx.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const auto node = static_cast<std::size_t>(part.fundamental_idx[i]);
    out.fundamental_stages.push_back(fund.col(col));
    out.stages[node] = fund.col(col);
    out.stage_derivatives[node] = b.f_fund.col(col);
  }
  for (std::size_t i = 0; i < part.silent_idx.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const auto node = static_cast<std::size_t>(part.silent_idx[i]);
    out.stages[node] = b.silent.col(col);
    out.stage_derivatives[node] = b.f_silent.col(col);
  }
}

}  // namespace

Partition make_partition(const HbvmTableau& t,
                         std::span<const int> fundamental) {
  const int n = t.stages();
  const int s = t.s;
  if (static_cast<int>(fundamental.size()) != s) {
    throw InvalidArgument("partition needs exactly s fundamental indices");
  }
  Partition p;
  p.fundamental_idx.assign(fundamental.begin(), fundamental.end());
  std::sort(p.fundamental_idx.begin(), p.fundamental_idx.end());
  for (std::size_t i = 0; i < p.fundamental_idx.size(); ++i) {
    const int idx = p.fundamental_idx[i];
    if (idx < 0 || idx >= n) throw InvalidArgument("fundamental index out of range");
    if (i > 0 && idx == p.fundamental_idx[i - 1]) {
      throw InvalidArgument("fundamental indices must be distinct");
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!std::binary_search(p.fundamental_idx.begin(), p.fundamental_idx.end(), i)) {
      p.silent_idx.push_back(i);
    }
  }
  p.symmetry_guaranteed = (n - s) % 2 == 0;

  const Eigen::MatrixXd I1 = select_rows(t.I_mat, p.fundamental_idx);
  const Eigen::MatrixXd I2 = select_rows(t.I_mat, p.silent_idx);
  const Eigen::MatrixXd P1 = select_rows(t.P_mat, p.fundamental_idx);
  const Eigen::MatrixXd P2 = select_rows(t.P_mat, p.silent_idx);
  const Eigen::VectorXd w1 = select_entries(t.rule.weights, p.fundamental_idx);
  const Eigen::VectorXd w2 = select_entries(t.rule.weights, p.silent_idx);

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(I1);
  if (!lu.isInvertible()) {
    throw InternalError("fundamental block of the integral matrix is singular");
  }
  // A1 = I2 I1^{-1}  <=>  I1^T A1^T = I2^T
  p.A1 = I1.transpose().fullPivLu().solve(I2.transpose()).transpose();
  p.u_hat = Eigen::VectorXd::Ones(I2.rows()) - p.A1 * Eigen::VectorXd::Ones(s);
  p.B1 = I1 * (P1.transpose() * w1.asDiagonal());
  p.B2 = I1 * (P2.transpose() * w2.asDiagonal());
  p.C = p.B1 + p.B2 * p.A1;
  return p;
}

Partition select_fundamental(const HbvmTableau& t) {
  const auto& nodes = t.rule.nodes;
  const int n = t.stages();
  std::vector<int> chosen;
  for (int j = 1; j <= t.s; ++j) {
    const double ref = static_cast<double>(j) / (t.s + 1);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double da = std::abs(nodes[a] - ref);
      const double db = std::abs(nodes[b] - ref);
      if (da != db) return da < db;
      return nodes[a] < nodes[b];
    });
    for (int idx : order) {
      if (nodes[idx] == 0.0) continue;
      if (std::find(chosen.begin(), chosen.end(), idx) != chosen.end()) continue;
      chosen.push_back(idx);
      break;
    }
  }
  return make_partition(t, chosen);
}

Partition first_s_partition(const HbvmTableau& t) {
  std::vector<int> chosen;
  for (int i = 0; i < t.stages() && static_cast<int>(chosen.size()) < t.s; ++i) {
    if (t.rule.nodes[i] != 0.0) chosen.push_back(i);
  }
  return make_partition(t, chosen);
}

Partition make_partition(const HbvmTableau& t, FundamentalSelection how) {
  return how == FundamentalSelection::rule_of_thumb ? select_fundamental(t)
                                                    : first_s_partition(t);
}

GammaChoice optimal_gamma(const Eigen::MatrixXd& C) {
  if (C.rows() == 0 || C.rows() != C.cols()) {
    throw InvalidArgument("C must be a nonempty square matrix");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(C, false);
  if (solver.info() != Eigen::Success) {
    throw InternalError("eigenvalue solver failed on C");
  }
  const Eigen::VectorXcd ev = solver.eigenvalues();
  Eigen::Index imin = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i) {
    if (std::abs(ev(i)) < std::abs(ev(imin))) imin = i;
  }
  const std::complex<double> mu = ev(imin);
  const double scale = ev.cwiseAbs().maxCoeff();
  if (std::abs(mu) <= 1e-14 * scale || scale == 0.0) {
    throw InvalidArgument("C is singular; no blended parameter exists");
  }
  GammaChoice g;
  g.gamma = std::abs(mu);
  g.rho_star = 1.0 - std::cos(std::abs(std::arg(mu)));
  return g;
}

BlendedConfig default_blended_config(const Partition& part) {
  BlendedConfig cfg;
  cfg.gamma = optimal_gamma(part.C).gamma;
  return cfg;
}

Eigen::MatrixXcd amplification_matrix(const Eigen::MatrixXd& C, double gamma,
                                      std::complex<double> q) {
  const Eigen::Index s = C.rows();
  const Eigen::MatrixXd shifted = C - gamma * Eigen::MatrixXd::Identity(s, s);
  const Eigen::MatrixXd core = C.partialPivLu().solve(shifted * shifted);
  const std::complex<double> denom = (1.0 - gamma * q) * (1.0 - gamma * q);
  return (q / denom) * core.cast<std::complex<double>>();
}

Eigen::MatrixXcd blended_iteration_matrix(const Eigen::MatrixXd& C,
                                          double gamma,
                                          std::complex<double> q) {
  using Mat = Eigen::MatrixXcd;
  const Eigen::Index s = C.rows();
  const Mat I = Mat::Identity(s, s);
  const Mat Cc = C.cast<std::complex<double>>();
  const Mat Cinv = C.inverse().cast<std::complex<double>>();
  const std::complex<double> theta = 1.0 / (1.0 - gamma * q);
  const Mat M = theta * (I - q * Cc) + (1.0 - theta) * gamma * (Cinv - q * I);
  return I - theta * M;
}

double amplification_scan(const Eigen::MatrixXd& C, double gamma,
                          std::span<const double> grid) {
  if (grid.empty()) throw InvalidArgument("amplification grid is empty");
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  double worst = 0.0;
  for (double y : grid) {
    if (!(y > 0.0)) throw InvalidArgument("grid values must be positive");
    const Eigen::MatrixXcd Z =
        amplification_matrix(C, gamma, std::complex<double>(0.0, y));
    const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Z, false);
    worst = std::max(worst, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw InvalidArgument("log grid needs 0 < lo <= hi and n >= 1");
  }
  std::vector<double> g(static_cast<std::size_t>(n));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < n; ++i) {
    g[i] = n == 1 ? lo : std::pow(10.0, a + (b - a) * i / (n - 1));
  }
  return g;
}

double scaled_tolerance(double tol, const State& y0) {
  return tol * std::max(1.0, y0.cwiseAbs().maxCoeff());
}

double stage_tolerance(double tol, const State& y0, const Eigen::MatrixXd& stages) {
  return std::max(scaled_tolerance(tol, y0), tol * stages.cwiseAbs().maxCoeff());
}

Eigen::MatrixXd block_residual(const VectorField& field, const Partition& part,
                               const State& y0, double h,
                               const Eigen::MatrixXd& fundamental) {
  const StageBlocks b = evaluate_blocks(field, part, y0, fundamental);
  return residual_from_blocks(part, y0, h, fundamental, b);
}

bool polish_done(StageSolution& out, double update, double tol,
                 const Eigen::MatrixXd& stages) {
  const double previous = out.last_update;
  out.last_update = update;
  if (update <= tol) out.converged = true;
  if (!out.converged) return false;
  const double roundoff = 4.0 * std::numeric_limits<double>::epsilon() *
                          std::max(1.0, stages.cwiseAbs().maxCoeff());
  return update <= roundoff || (previous > 0.0 && update >= 0.5 * previous);
}

StageSolution solve_stages(const VectorField& field, const HbvmTableau& t,
                           const Partition& part, const BlendedConfig& cfg,
                           const State& y0, double h) {
  if (!(cfg.gamma > 0.0)) throw InvalidArgument("blended gamma must be positive");
  const Eigen::Index dim = y0.size();
  const Eigen::Index s = t.s;
  const Eigen::MatrixXd J0 = field.jacobian(y0);
  const Eigen::MatrixXd Phi =
      Eigen::MatrixXd::Identity(dim, dim) - h * cfg.gamma * J0;
  const Eigen::PartialPivLU<Eigen::MatrixXd> phi_lu(Phi);
  if (!std::isfinite(phi_lu.rcond()) || phi_lu.rcond() < 1e-14) {
    throw StepFailure("blended weight matrix I - h gamma J0 is singular",
                      std::numeric_limits<double>::infinity(), 0);
  }
  const Eigen::MatrixXd CinvT = part.C.inverse().transpose();
  const Eigen::MatrixXd CT = part.C.transpose();

  Eigen::MatrixXd fund = y0 * Eigen::RowVectorXd::Ones(s);
  StageSolution out;
  for (int it = 1; it <= cfg.max_outer; ++it) {
    const StageBlocks b = evaluate_blocks(field, part, y0, fund);
    const Eigen::MatrixXd psi1 = -residual_from_blocks(part, y0, h, fund, b);
    out.residual = psi1.cwiseAbs().maxCoeff();
    if (!std::isfinite(out.residual)) break;
    if (out.residual <= stage_tolerance(cfg.newton_tol, y0, fund)) {
      out.converged = true;
    }
    if (out.residual == 0.0) break;
    const Eigen::MatrixXd psi2 = cfg.gamma * (psi1 * CinvT);
    // psi = theta psi1 + (I - theta) psi2
    const Eigen::MatrixXd psi = phi_lu.solve(psi1 - psi2) + psi2;
    Eigen::MatrixXd delta = phi_lu.solve(psi);
    for (int inner = 1; inner < cfg.max_inner; ++inner) {
      const Eigen::MatrixXd a = delta - h * (J0 * delta * CT);
      const Eigen::MatrixXd c = cfg.gamma * (delta * CinvT - h * (J0 * delta));
      const Eigen::MatrixXd m_delta = phi_lu.solve(a - c) + c;
      delta -= phi_lu.solve(m_delta - psi);
    }
    fund += delta;
    out.iterations = it;
    if (polish_done(out, delta.cwiseAbs().maxCoeff(),
                    stage_tolerance(cfg.newton_tol, y0, fund), fund)) {
      break;
    }
  }
  finish(out, field, part, y0, fund);
  return out;
}

StageSolution solve_stages_newton(const VectorField& field,
                                  const HbvmTableau& t, const Partition& part,
                                  const State& y0, double h, double tol,
                                  int max_iter) {
  const Eigen::Index dim = y0.size();
  const Eigen::Index s = t.s;
  const Eigen::MatrixXd J0 = field.jacobian(y0);
  // I - h C (x) J0 on the stacked vector (stage-major).
  Eigen::MatrixXd K = Eigen::MatrixXd::Identity(dim * s, dim * s);
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = 0; j < s; ++j) {
      K.block(i * dim, j * dim, dim, dim) -= h * part.C(i, j) * J0;
    }
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
  if (!std::isfinite(lu.rcond()) || lu.rcond() < 1e-14) {
    throw StepFailure("simplified Newton matrix is singular",
                      std::numeric_limits<double>::infinity(), 0);
  }

  Eigen::MatrixXd fund = y0 * Eigen::RowVectorXd::Ones(s);
  StageSolution out;
  for (int it = 1; it <= max_iter; ++it) {
    const StageBlocks b = evaluate_blocks(field, part, y0, fund);
    const Eigen::MatrixXd psi1 = -residual_from_blocks(part, y0, h, fund, b);
    out.residual = psi1.cwiseAbs().maxCoeff();
    if (!std::isfinite(out.residual)) break;
    if (out.residual <= stage_tolerance(tol, y0, fund)) out.converged = true;
    if (out.residual == 0.0) break;
    const Eigen::VectorXd rhs =
        Eigen::Map<const Eigen::VectorXd>(psi1.data(), psi1.size());
    const Eigen::VectorXd d = lu.solve(rhs);
    const Eigen::MatrixXd delta =
        Eigen::Map<const Eigen::MatrixXd>(d.data(), dim, s);
    fund += delta;
    out.iterations = it;
    if (polish_done(out, delta.cwiseAbs().maxCoeff(),
                    stage_tolerance(tol, y0, fund), fund)) {
      break;
    }
  }
  finish(out, field, part, y0, fund);
  return out;
}

}  // namespace hbvm
