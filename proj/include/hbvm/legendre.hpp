#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hbvm {

/// Values P_1(t), ..., P_s(t) of the orthonormal shifted Legendre basis on
/// [0,1]. P_j has degree j-1 and the family satisfies
/// int_0^1 P_i P_j = delta_ij.
struct BasisEval {
  int s = 0;
  Eigen::VectorXd values;
};

/// Matrices that describe the action of integration on the basis:
/// int_0^t P_j = sum_i P_i(t) * xs_hat(i, j).
struct StructuralMatrices {
  Eigen::MatrixXd xs;        // s x s tridiagonal, spectrum of the Gauss method
  Eigen::MatrixXd xs_hat;    // (s+1) x s, xs plus a last row with xi_s
  Eigen::MatrixXd xs_tilde;  // (s+1) x (s+1), xs_hat padded with a zero column
  std::vector<double> xi;    // xi_1 .. xi_s
};

/// xi_j = 1 / (2 sqrt((2j+1)(2j-1))), j >= 1.
double legendre_xi(int j);

/// Forward three-term recurrence. Throws InvalidArgument for s < 1 or
/// non-finite t.
BasisEval eval_basis(int s, double t);

/// Entry j is int_0^c P_j(x) dx, from the closed-form antiderivative
/// int_0^c P_j = xi_j P_{j+1}(c) - xi_{j-1} P_{j-1}(c) (P_1 integrates to c).
/// Throws InvalidArgument if c is outside [0,1].
std::vector<double> integrate_basis(int s, double c);

StructuralMatrices structural_matrices(int s);

/// n x s matrix with rows P_1(tau_i) .. P_s(tau_i).
Eigen::MatrixXd basis_matrix(std::span<const double> nodes, int s);

/// n x s matrix with rows int_0^{tau_i} P_j, j = 1..s.
Eigen::MatrixXd integral_matrix(std::span<const double> nodes, int s);

}  // namespace hbvm
