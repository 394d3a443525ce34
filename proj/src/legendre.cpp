#include "hbvm/legendre.hpp"

#include <cmath>
#include <string>

#include "hbvm/errors.hpp"

namespace hbvm {

namespace {

void require_degree(int s) {
  if (s < 1) {
    throw InvalidArgument("basis size s must be >= 1, got " +
                          std::to_string(s));
  }
}

}  // namespace

double legendre_xi(int j) {
  const double a = 2.0 * j + 1.0;
  const double b = 2.0 * j - 1.0;
  return 1.0 / (2.0 * std::sqrt(a * b));
}

BasisEval eval_basis(int s, double t) {
  require_degree(s);
  if (!std::isfinite(t)) {
    throw InvalidArgument("basis evaluation point must be finite");
  }
  BasisEval out{s, Eigen::VectorXd(s)};
  auto& p = out.values;
  const double x = 2.0 * t - 1.0;
  p(0) = 1.0;
  if (s > 1) p(1) = std::sqrt(3.0) * x;
  // P_{j+2} = x (2j+1)/(j+1) sqrt((2j+3)/(2j+1)) P_{j+1}
  //         - j/(j+1) sqrt((2j+3)/(2j-1)) P_j,   j >= 1
  for (int j = 1; j + 1 < s; ++j) {
    const double jj = j;
    const double c1 = (2.0 * jj + 1.0) / (jj + 1.0) *
                      std::sqrt((2.0 * jj + 3.0) / (2.0 * jj + 1.0));
    const double c2 =
        jj / (jj + 1.0) * std::sqrt((2.0 * jj + 3.0) / (2.0 * jj - 1.0));
    p(j + 1) = x * c1 * p(j) - c2 * p(j - 1);
  }
  return out;
}

std::vector<double> integrate_basis(int s, double c) {
  require_degree(s);
  if (!(c >= 0.0 && c <= 1.0)) {
    throw InvalidArgument("integration limit must lie in [0,1]");
  }
  // differences against t = 0 so the integral vanishes exactly at c = 0
  const Eigen::VectorXd p =
      eval_basis(s + 1, c).values - eval_basis(s + 1, 0.0).values;
  std::vector<double> out(static_cast<std::size_t>(s));
  out[0] = c;
  for (int j = 2; j <= s; ++j) {
    out[j - 1] = legendre_xi(j) * p(j) - legendre_xi(j - 1) * p(j - 2);
  }
  return out;
}

StructuralMatrices structural_matrices(int s) {
  require_degree(s);
  StructuralMatrices m;
  m.xi.resize(static_cast<std::size_t>(s));
  for (int j = 1; j <= s; ++j) m.xi[j - 1] = legendre_xi(j);

  m.xs_tilde = Eigen::MatrixXd::Zero(s + 1, s + 1);
  m.xs_tilde(0, 0) = 0.5;
  for (int j = 1; j <= s; ++j) {
    m.xs_tilde(j, j - 1) = m.xi[j - 1];
    if (j < s) m.xs_tilde(j - 1, j) = -m.xi[j - 1];
  }
  m.xs_hat = m.xs_tilde.leftCols(s);
  m.xs = m.xs_hat.topRows(s);
  return m;
}

Eigen::MatrixXd basis_matrix(std::span<const double> nodes, int s) {
  require_degree(s);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(nodes.size()), s);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        eval_basis(s, nodes[i]).values.transpose();
  }
  return out;
}

Eigen::MatrixXd integral_matrix(std::span<const double> nodes, int s) {
  require_degree(s);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(nodes.size()), s);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto row = integrate_basis(s, nodes[i]);
    for (int j = 0; j < s; ++j) out(static_cast<Eigen::Index>(i), j) = row[j];
  }
  return out;
}

}  // namespace hbvm
