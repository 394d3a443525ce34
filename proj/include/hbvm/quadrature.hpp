#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace hbvm {

enum class NodeFamily { gauss, lobatto, custom };

std::string_view to_string(NodeFamily family);
/// Parses "gauss", "lobatto" or "custom"; throws InvalidArgument otherwise.
NodeFamily parse_node_family(std::string_view name);

/// Quadrature rule on [0,1] with sorted, distinct nodes.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  NodeFamily family = NodeFamily::custom;
  int exactness_degree = 0;

  std::size_t size() const { return nodes.size(); }

  /// B(2s): exact for polynomials of degree 2s-1.
  bool satisfies_b(int order) const { return exactness_degree >= order - 1; }
};

/// k-point Gauss-Legendre rule, exact up to degree 2k-1.
QuadratureRule gauss_rule(int k);

/// n-point Lobatto rule including both endpoints, exact up to degree 2n-3.
QuadratureRule lobatto_rule(int n);

/// w_i = int_0^1 l_i(t) dt for the Lagrange basis on `nodes`.
std::vector<double> interpolatory_weights(std::span<const double> nodes);

/// Interpolatory rule on arbitrary distinct nodes (sorted on output) with
/// its exactness degree measured monomial by monomial.
QuadratureRule custom_rule(std::span<const double> nodes);

/// Largest d such that the rule integrates t^0..t^d to within `tol`.
int measure_exactness(std::span<const double> nodes,
                      std::span<const double> weights, double tol = 1e-12);

}  // namespace hbvm
