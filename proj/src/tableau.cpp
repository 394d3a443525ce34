#include "hbvm/tableau.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "hbvm/errors.hpp"
#include "hbvm/format.hpp"
#include "hbvm/legendre.hpp"

namespace hbvm {

namespace {

HbvmTableau assemble(int k, int s, QuadratureRule rule) {
  HbvmTableau t;
  t.k = k;
  t.s = s;
  t.rule = std::move(rule);
  t.I_mat = integral_matrix(t.rule.nodes, s);
  t.P_mat = basis_matrix(t.rule.nodes, s);
  const Eigen::Map<const Eigen::VectorXd> w(
      t.rule.weights.data(), static_cast<Eigen::Index>(t.rule.size()));
  t.A = t.I_mat * (t.P_mat.transpose() * w.asDiagonal());
  return t;
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  if (solver.info() != Eigen::Success) {
    throw InternalError("nonsymmetric eigenvalue solver failed");
  }
  const Eigen::VectorXcd ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

void append_array(std::ostringstream& os, const std::vector<double>& v) {
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << format_number(v[i]);
  }
  os << ']';
}

}  // namespace

bool HbvmTableau::symmetric_nodes(double tol) const {
  const auto& c = rule.nodes;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (std::abs(c[i] + c[c.size() - 1 - i] - 1.0) > tol) return false;
  }
  return true;
}

HbvmTableau build_hbvm(int k, int s, NodeFamily family) {
  if (s < 1) throw InvalidArgument("s must be >= 1");
  if (k < s) {
    throw InvalidArgument("HBVM(k,s) needs k >= s, got k = " +
                          std::to_string(k) + ", s = " + std::to_string(s));
  }
  switch (family) {
    case NodeFamily::gauss:
      return assemble(k, s, gauss_rule(k));
    case NodeFamily::lobatto:
      return assemble(k, s, lobatto_rule(k + 1));
    case NodeFamily::custom:
      break;
  }
  throw InvalidArgument("custom family requires an explicit node set");
}

HbvmTableau build_hbvm(std::span<const double> nodes, int s) {
  if (s < 1) throw InvalidArgument("s must be >= 1");
  const int k = static_cast<int>(nodes.size());
  if (k < s) {
    throw InvalidArgument("HBVM(k,s) needs at least s nodes");
  }
  QuadratureRule rule = custom_rule(nodes);
  if (!rule.satisfies_b(2 * s)) {
    throw PreconditionViolation(
        "node set violates B(2s): exactness degree " +
            std::to_string(rule.exactness_degree) + " < " +
            std::to_string(2 * s - 1),
        rule.exactness_degree);
  }
  return assemble(k, s, std::move(rule));
}

CollocationTableau build_collocation(std::span<const double> nodes) {
  CollocationTableau c;
  c.weights = interpolatory_weights(nodes);
  c.nodes.assign(nodes.begin(), nodes.end());
  const std::size_t k = nodes.size();
  c.A_colloc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                     static_cast<Eigen::Index>(k));
  // l_j has degree k-1; Gauss with k/2+1 points on [0, tau_i] is exact.
  const QuadratureRule g = gauss_rule(static_cast<int>(k / 2 + 1));
  for (std::size_t i = 0; i < k; ++i) {
    const double upper = nodes[i];
    for (std::size_t j = 0; j < k; ++j) {
      double acc = 0.0;
      for (std::size_t q = 0; q < g.size(); ++q) {
        const double x = upper * g.nodes[q];
        double l = 1.0;
        for (std::size_t r = 0; r < k; ++r) {
          if (r != j) l *= (x - nodes[r]) / (nodes[j] - nodes[r]);
        }
        acc += g.weights[q] * l;
      }
      c.A_colloc(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          upper * acc;
    }
  }
  return c;
}

void sort_spectrum(std::vector<std::complex<double>>& values) {
  double scale = 0.0;
  for (const auto& v : values) scale = std::max(scale, std::abs(v));
  const double tol = 1e-10 * std::max(scale, 1.0);
  std::sort(values.begin(), values.end(),
            [tol](const std::complex<double>& a, const std::complex<double>& b) {
              if (std::abs(a.real() - b.real()) > tol) return a.real() < b.real();
              return a.imag() < b.imag();
            });
}

std::vector<std::complex<double>> nonzero_spectrum(const HbvmTableau& t) {
  const auto all = eigenvalues(t.A);
  double radius = 0.0;
  for (const auto& v : all) radius = std::max(radius, std::abs(v));
  std::vector<std::complex<double>> out;
  for (const auto& v : all) {
    if (std::abs(v) > 1e-8 * radius) out.push_back(v);
  }
  sort_spectrum(out);
  return out;
}

std::vector<std::complex<double>> gauss_spectrum(int s) {
  auto ev = eigenvalues(structural_matrices(s).xs);
  sort_spectrum(ev);
  return ev;
}

WTransformationCheck w_transformation_check(const HbvmTableau& t) {
  const int n = t.stages();
  const Eigen::MatrixXd P = basis_matrix(t.rule.nodes, n);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(P);
  const auto& sv = svd.singularValues();
  WTransformationCheck out;
  out.condition_number = sv(0) / sv(sv.size() - 1);
  out.ill_conditioned = out.condition_number > 1e12;

  const Eigen::MatrixXd transformed = P.partialPivLu().solve(t.A * P);
  const StructuralMatrices sm = structural_matrices(t.s);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(n, n);
  const int block = std::min(n, t.s + 1);
  expected.topLeftCorner(block, block) =
      sm.xs_tilde.topLeftCorner(block, block);
  out.residual = (transformed - expected).cwiseAbs().maxCoeff();
  return out;
}

SimplifyingResiduals simplifying_assumption_residuals(const HbvmTableau& t) {
  const int n = t.stages();
  const int s = t.s;
  const Eigen::Map<const Eigen::VectorXd> tau(t.rule.nodes.data(), n);
  const Eigen::Map<const Eigen::VectorXd> w(t.rule.weights.data(), n);
  SimplifyingResiduals r;

  for (int j = 1; j <= s; ++j) {
    const Eigen::VectorXd lhs = j * (t.A * tau.array().pow(j - 1).matrix());
    const Eigen::VectorXd rhs = tau.array().pow(j).matrix();
    r.c_s = std::max(r.c_s, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  for (int d = 0; d < 2 * s; ++d) {
    const double q = w.dot(tau.array().pow(d).matrix());
    r.b_2s = std::max(r.b_2s, std::abs(q - 1.0 / (d + 1.0)));
  }
  if (s > 1) {
    Eigen::MatrixXd V(n, s - 1);
    for (int j = 0; j < s - 1; ++j) V.col(j) = tau.array().pow(j).matrix();
    Eigen::VectorXd qdiag(s - 1);
    for (int j = 0; j < s - 1; ++j) qdiag(j) = j + 1.0;
    const Eigen::MatrixXd lhs = t.P_mat * (t.I_mat.transpose() * w.asDiagonal()) *
                                V * qdiag.asDiagonal();
    const Eigen::MatrixXd rhs = Eigen::MatrixXd::Ones(n, s - 1) -
                                tau.asDiagonal() * V;
    r.d_sm1 = (lhs - rhs).cwiseAbs().maxCoeff();
  }
  return r;
}

int numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * sv(0)) ++rank;
  }
  return rank;
}

std::string tableau_to_json(const HbvmTableau& t) {
  std::ostringstream os;
  os << "{\"k\": " << t.k << ", \"s\": " << t.s << ", \"family\": \""
     << to_string(t.family()) << "\", \"nodes\": ";
  append_array(os, t.rule.nodes);
  os << ", \"weights\": ";
  append_array(os, t.rule.weights);
  os << ", \"A\": [";
  for (Eigen::Index i = 0; i < t.A.rows(); ++i) {
    if (i) os << ", ";
    std::vector<double> row(t.A.cols());
    for (Eigen::Index j = 0; j < t.A.cols(); ++j) row[j] = t.A(i, j);
    append_array(os, row);
  }
  os << "]}";
  return os.str();
}

}  // namespace hbvm
