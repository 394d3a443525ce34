#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hbvm/quadrature.hpp"

namespace hbvm {

/// Butcher tableau of HBVM(k,s): A = I_mat * P_mat^T * diag(omega).
///
/// Gauss-family tableaux carry k abscissae, Lobatto-family ones k+1 (the
/// extra node is t = 0). Custom tableaux carry k = number of nodes.
struct HbvmTableau {
  int k = 0;
  int s = 0;
  QuadratureRule rule;
  Eigen::MatrixXd A;
  Eigen::MatrixXd I_mat;  // n x s, int_0^{tau_i} P_j
  Eigen::MatrixXd P_mat;  // n x s, P_j(tau_i)

  int stages() const { return static_cast<int>(rule.size()); }
  const std::vector<double>& nodes() const { return rule.nodes; }
  const std::vector<double>& weights() const { return rule.weights; }
  NodeFamily family() const { return rule.family; }
  /// True when tau_i + tau_{n+1-i} = 1 for all i.
  bool symmetric_nodes(double tol = 1e-14) const;
};

/// Collocation method on arbitrary distinct nodes:
/// A_colloc(i,j) = int_0^{tau_i} l_j.
struct CollocationTableau {
  std::vector<double> nodes;
  Eigen::MatrixXd A_colloc;
  std::vector<double> weights;
};

HbvmTableau build_hbvm(int k, int s, NodeFamily family);

/// Custom node set, k = nodes.size(). Rejects node sets whose interpolatory
/// rule is not exact to degree 2s-1 (PreconditionViolation).
HbvmTableau build_hbvm(std::span<const double> nodes, int s);

CollocationTableau build_collocation(std::span<const double> nodes);

/// Nonzero eigenvalues of A (modulus above 1e-8 times the spectral radius),
/// sorted by real part, then imaginary part.
std::vector<std::complex<double>> nonzero_spectrum(const HbvmTableau& t);

/// Eigenvalues of the s x s Legendre matrix X_s in the same ordering.
std::vector<std::complex<double>> gauss_spectrum(int s);

/// Lexicographic (real, imag) ordering with a small tolerance on the real
/// part so that conjugate pairs stay adjacent.
void sort_spectrum(std::vector<std::complex<double>>& values);

struct WTransformationCheck {
  double residual = 0.0;
  double condition_number = 0.0;
  bool ill_conditioned = false;  // cond(P) > 1e12
};

/// max |P^{-1} A P - blockdiag(X~_s, 0)| with P the full n x n basis matrix.
WTransformationCheck w_transformation_check(const HbvmTableau& t);

struct SimplifyingResiduals {
  double c_s = 0.0;    // C(s): sum_l a_il tau_l^{j-1} j = tau_i^j
  double b_2s = 0.0;   // B(2s): sum_l w_l tau_l^{d} = 1/(d+1), d < 2s
  double d_sm1 = 0.0;  // D(s-1) as P_s I_s^T W V Q = e ebar^T - D V
};

SimplifyingResiduals simplifying_assumption_residuals(const HbvmTableau& t);

/// Numerical rank with relative threshold rel_tol * sigma_max.
int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

/// Tableau export: {k, s, family, nodes, weights, A}, 17 significant digits.
std::string tableau_to_json(const HbvmTableau& t);

}  // namespace hbvm
