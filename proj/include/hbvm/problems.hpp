#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hbvm/hamiltonian.hpp"

namespace hbvm {

struct ProblemSpec {
  std::string name;
  HamiltonianSystem system;
  State y0;
  double default_h = 0.1;
  std::optional<int> polynomial_degree;  // nu, for polynomial H
  std::vector<std::pair<std::string, double>> parameters;
  /// Interval used by convergence tables unless overridden.
  double default_t_final = 1.0;

  double parameter(const std::string& key) const;
};

/// H = p^3/3 - p/2 + q^6/30 + q^4/4 - q^3/3 + 1/6, y0 = (q, p) = (0, 1).
ProblemSpec faou_problem();

/// Fermi-Pasta-Ulam chain, m = 3 (six masses), omega = 50.
ProblemSpec fpu_problem();

/// Charged particle in a Biot-Savart field, alpha = e B0 = -1.
ProblemSpec biot_problem();

/// Sitnikov three-body configuration with the "angular_momentum" invariant.
ProblemSpec sitnikov_problem();

/// H = (|p|^2 + |q|^2) / 2, y0 = (1, 0, ..., 0).
ProblemSpec harmonic_oscillator(int m = 1);

/// Exact flow of the harmonic oscillator from y0 after time t.
State harmonic_exact(const State& y0, double t);

/// faou, fpu, biot, sitnikov, harmonic.
ProblemSpec problem_by_name(const std::string& name);
std::vector<std::string> problem_names();

}  // namespace hbvm
