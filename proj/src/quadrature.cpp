#include "hbvm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hbvm/errors.hpp"

namespace hbvm {

namespace {

constexpr int kMaxNewton = 100;
// Last Newton correction accepted as converged; the quadratic rate makes the
// following step round-off sized.
constexpr double kNewtonStep = 1e-15;

struct LegendreValue {
  double value;       // L_n(x)
  double derivative;  // L_n'(x)
  double previous;    // L_{n-1}(x)
};

// Standard Legendre polynomial on [-1,1] by the three-term recurrence.
LegendreValue legendre_on_interval(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) return {1.0, 0.0, 0.0};
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp, p0};
}

void require_distinct(std::span<const double> nodes) {
  if (nodes.empty()) throw InvalidArgument("node set must not be empty");
  std::vector<double> sorted(nodes.begin(), nodes.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!std::isfinite(sorted[i])) {
      throw InvalidArgument("nodes must be finite");
    }
    if (i > 0 && sorted[i] == sorted[i - 1]) {
      throw InvalidArgument("duplicate node " + std::to_string(sorted[i]));
    }
  }
}

}  // namespace

std::string_view to_string(NodeFamily family) {
  switch (family) {
    case NodeFamily::gauss:
      return "gauss";
    case NodeFamily::lobatto:
      return "lobatto";
    case NodeFamily::custom:
      return "custom";
  }
  return "custom";
}

NodeFamily parse_node_family(std::string_view name) {
  if (name == "gauss") return NodeFamily::gauss;
  if (name == "lobatto") return NodeFamily::lobatto;
  if (name == "custom") return NodeFamily::custom;
  throw InvalidArgument("unknown node family '" + std::string(name) + "'");
}

QuadratureRule gauss_rule(int k) {
  if (k < 1) {
    throw InvalidArgument("Gauss rule needs k >= 1, got " + std::to_string(k));
  }
  QuadratureRule rule;
  rule.family = NodeFamily::gauss;
  rule.exactness_degree = 2 * k - 1;
  rule.nodes.assign(static_cast<std::size_t>(k), 0.0);
  rule.weights.assign(static_cast<std::size_t>(k), 0.0);

  // Roots come in symmetric pairs; polish the upper half on [-1,1] and mirror.
  const int half = (k + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (k + 0.5));
    LegendreValue lv{};
    bool converged = false;
    for (int it = 0; it < kMaxNewton; ++it) {
      lv = legendre_on_interval(k, x);
      const double dx = lv.value / lv.derivative;
      x -= dx;
      if (std::abs(dx) <= kNewtonStep) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw InternalError("Gauss node polishing did not converge for k = " +
                          std::to_string(k));
    }
    if (k % 2 == 1 && i == half - 1) x = 0.0;
    lv = legendre_on_interval(k, x);
    // weight on [-1,1] is 2 / ((1-x^2) L'^2); halve for [0,1]
    const double w = 1.0 / ((1.0 - x * x) * lv.derivative * lv.derivative);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(k - 1 - i);
    rule.nodes[lo] = 0.5 * (1.0 - x);
    rule.nodes[hi] = 0.5 * (1.0 + x);
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  return rule;
}

QuadratureRule lobatto_rule(int n) {
  if (n < 2) {
    throw InvalidArgument("Lobatto rule needs n >= 2, got " +
                          std::to_string(n));
  }
  const int deg = n - 1;  // interior nodes are the roots of L_deg'
  QuadratureRule rule;
  rule.family = NodeFamily::lobatto;
  rule.exactness_degree = 2 * n - 3;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);
  const double end_weight = 1.0 / (deg * (deg + 1.0));
  rule.nodes.front() = 0.0;
  rule.nodes.back() = 1.0;
  rule.weights.front() = end_weight;
  rule.weights.back() = end_weight;

  const int interior = n - 2;
  const int half = (interior + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 1.0) / deg);
    bool converged = false;
    for (int it = 0; it < kMaxNewton; ++it) {
      const LegendreValue lv = legendre_on_interval(deg, x);
      // (1 - x^2) L'' = 2x L' - deg(deg+1) L
      const double second =
          (2.0 * x * lv.derivative - deg * (deg + 1.0) * lv.value) /
          (1.0 - x * x);
      const double dx = lv.derivative / second;
      x -= dx;
      if (std::abs(dx) <= kNewtonStep) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw InternalError("Lobatto node polishing did not converge for n = " +
                          std::to_string(n));
    }
    if (interior % 2 == 1 && i == half - 1) x = 0.0;
    const double l = legendre_on_interval(deg, x).value;
    const double w = end_weight / (l * l);
    const auto lo = static_cast<std::size_t>(1 + i);
    const auto hi = static_cast<std::size_t>(n - 2 - i);
    rule.nodes[lo] = 0.5 * (1.0 - x);
    rule.nodes[hi] = 0.5 * (1.0 + x);
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  return rule;
}

std::vector<double> interpolatory_weights(std::span<const double> nodes) {
  require_distinct(nodes);
  const std::size_t k = nodes.size();
  // Lagrange polynomials have degree k-1; a Gauss rule with k/2+1 points
  // integrates them exactly.
  const QuadratureRule g = gauss_rule(static_cast<int>(k / 2 + 1));
  std::vector<double> w(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    double acc = 0.0;
    for (std::size_t q = 0; q < g.size(); ++q) {
      double l = 1.0;
      for (std::size_t j = 0; j < k; ++j) {
        if (j != i) l *= (g.nodes[q] - nodes[j]) / (nodes[i] - nodes[j]);
      }
      acc += g.weights[q] * l;
    }
    w[i] = acc;
  }
  return w;
}

int measure_exactness(std::span<const double> nodes,
                      std::span<const double> weights, double tol) {
  const int max_degree = 2 * static_cast<int>(nodes.size()) + 1;
  int exact = -1;
  for (int d = 0; d <= max_degree; ++d) {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      acc += weights[i] * std::pow(nodes[i], d);
    }
    if (std::abs(acc - 1.0 / (d + 1.0)) > tol) break;
    exact = d;
  }
  return exact;
}

QuadratureRule custom_rule(std::span<const double> nodes) {
  require_distinct(nodes);
  for (double t : nodes) {
    if (t < 0.0 || t > 1.0) {
      throw InvalidArgument("custom nodes must lie in [0,1]");
    }
  }
  QuadratureRule rule;
  rule.family = NodeFamily::custom;
  rule.nodes.assign(nodes.begin(), nodes.end());
  std::sort(rule.nodes.begin(), rule.nodes.end());
  rule.weights = interpolatory_weights(rule.nodes);
  rule.exactness_degree = measure_exactness(rule.nodes, rule.weights);
  return rule;
}

}  // namespace hbvm
