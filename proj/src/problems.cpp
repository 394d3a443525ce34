#include "hbvm/problems.hpp"

#include <array>
#include <cmath>

#include "hbvm/errors.hpp"

namespace hbvm {

double ProblemSpec::parameter(const std::string& key) const {
  for (const auto& [k, v] : parameters) {
    if (k == key) return v;
  }
  throw InvalidArgument("problem '" + name + "' has no parameter '" + key + "'");
}

ProblemSpec faou_problem() {
  auto energy = [](const State& y) {
    const double q = y(0);
    const double p = y(1);
    const double q2 = q * q;
    const double q3 = q2 * q;
    return p * p * p / 3.0 - p / 2.0 + q3 * q3 / 30.0 + q2 * q2 / 4.0 -
           q3 / 3.0 + 1.0 / 6.0;
  };
  auto gradient = [](const State& y) {
    const double q = y(0);
    const double p = y(1);
    State g(2);
    g(0) = std::pow(q, 5) / 5.0 + q * q * q - q * q;
    g(1) = p * p - 0.5;
    return g;
  };
  auto hessian = [](const State& y) {
    const double q = y(0);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);
    h(0, 0) = std::pow(q, 4) + 3.0 * q * q - 2.0 * q;
    h(1, 1) = 2.0 * y(1);
    return h;
  };
  State y0(2);
  y0 << 0.0, 1.0;
  ProblemSpec spec{"faou",
                   HamiltonianSystem(2, energy, gradient, hessian),
                   y0,
                   0.16,
                   6,
                   {},
                   48.0};
  return spec;
}

ProblemSpec fpu_problem() {
  constexpr int m = 3;
  constexpr int n = 2 * m;  // masses
  constexpr double omega = 50.0;
  // q_0 = q_{2m+1} = 0 are fixed walls; the chain index maps to y(i-1).
  auto q_at = [](const State& y, int i) {
    return (i == 0 || i == n + 1) ? 0.0 : y(i - 1);
  };
  auto energy = [q_at](const State& y) {
    double h = 0.5 * y.tail(n).squaredNorm();
    for (int i = 1; i <= m; ++i) {
      const double d = q_at(y, 2 * i) - q_at(y, 2 * i - 1);
      h += omega * omega / 4.0 * d * d;
    }
    for (int i = 0; i <= m; ++i) {
      const double d = q_at(y, 2 * i + 1) - q_at(y, 2 * i);
      h += d * d * d * d;
    }
    return h;
  };
  auto gradient = [q_at](const State& y) {
    State g = State::Zero(2 * n);
    g.tail(n) = y.tail(n);
    auto add = [&g](int i, double v) {
      if (i >= 1 && i <= n) g(i - 1) += v;
    };
    for (int i = 1; i <= m; ++i) {
      const double d = q_at(y, 2 * i) - q_at(y, 2 * i - 1);
      add(2 * i, omega * omega / 2.0 * d);
      add(2 * i - 1, -omega * omega / 2.0 * d);
    }
    for (int i = 0; i <= m; ++i) {
      const double d = q_at(y, 2 * i + 1) - q_at(y, 2 * i);
      add(2 * i + 1, 4.0 * d * d * d);
      add(2 * i, -4.0 * d * d * d);
    }
    return g;
  };
  auto hessian = [q_at](const State& y) {
    Eigen::MatrixXd hs = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    hs.bottomRightCorner(n, n).setIdentity();
    // Spring between chain points a and b with curvature c in (q_b - q_a).
    auto spring = [&hs](int a, int b, double c) {
      const bool ia = a >= 1 && a <= n;
      const bool ib = b >= 1 && b <= n;
      if (ia) hs(a - 1, a - 1) += c;
      if (ib) hs(b - 1, b - 1) += c;
      if (ia && ib) {
        hs(a - 1, b - 1) -= c;
        hs(b - 1, a - 1) -= c;
      }
    };
    for (int i = 1; i <= m; ++i) spring(2 * i - 1, 2 * i, omega * omega / 2.0);
    for (int i = 0; i <= m; ++i) {
      const double d = q_at(y, 2 * i + 1) - q_at(y, 2 * i);
      spring(2 * i, 2 * i + 1, 12.0 * d * d);
    }
    return hs;
  };
  State y0 = State::Zero(2 * n);
  for (int i = 1; i <= n; ++i) y0(i - 1) = (i - 1) / 10.0;
  return ProblemSpec{"fpu",
                     HamiltonianSystem(2 * n, energy, gradient, hessian),
                     y0,
                     0.05,
                     4,
                     {{"m", m}, {"omega", omega}},
                     10.0};
}

ProblemSpec biot_problem() {
  constexpr double mass = 1.0;
  constexpr double charge = -1.0;
  constexpr double b0 = 1.0;
  constexpr double alpha = charge * b0;
  auto rho2_of = [](const State& y) {
    const double r2 = y(0) * y(0) + y(1) * y(1);
    if (!(r2 > 0.0)) {
      throw DomainError("Biot-Savart Hamiltonian is singular at rho = 0");
    }
    return r2;
  };
  auto energy = [rho2_of](const State& y) {
    const double r2 = rho2_of(y);
    const double a = y(3) - alpha * y(0) / r2;
    const double b = y(4) - alpha * y(1) / r2;
    const double c = y(5) + alpha * 0.5 * std::log(r2);
    return (a * a + b * b + c * c) / (2.0 * mass);
  };
  auto gradient = [rho2_of](const State& y) {
    const double x = y(0);
    const double yy = y(1);
    const double r2 = rho2_of(y);
    const double r4 = r2 * r2;
    const double a = y(3) - alpha * x / r2;
    const double b = y(4) - alpha * yy / r2;
    const double c = y(5) + alpha * 0.5 * std::log(r2);
    State g(6);
    g(0) = (a * (-alpha * (yy * yy - x * x) / r4) +
            b * (2.0 * alpha * x * yy / r4) + c * alpha * x / r2) /
           mass;
    g(1) = (a * (2.0 * alpha * x * yy / r4) +
            b * (-alpha * (x * x - yy * yy) / r4) + c * alpha * yy / r2) /
           mass;
    g(2) = 0.0;
    g(3) = a / mass;
    g(4) = b / mass;
    g(5) = c / mass;
    return g;
  };
  State y0(6);
  y0 << 0.5, 10.0, 0.0, -0.1, -0.3, 0.0;
  return ProblemSpec{"biot",
                     HamiltonianSystem(6, energy, gradient),
                     y0,
                     0.1,
                     std::nullopt,
                     {{"m", mass}, {"e", charge}, {"B0", b0}},
                     50.0};
}

ProblemSpec sitnikov_problem() {
  constexpr int bodies = 3;
  constexpr double G = 1.0;
  const std::array<double, bodies> masses{1.0, 1.0, 1e-5};
  const int nq = 3 * bodies;

  auto energy = [masses, nq](const State& y) {
    double kinetic = 0.0;
    for (int i = 0; i < bodies; ++i) {
      kinetic += y.segment(nq + 3 * i, 3).squaredNorm() / masses[i];
    }
    double potential = 0.0;
    for (int i = 0; i < bodies; ++i) {
      for (int j = 0; j < i; ++j) {
        const double d = (y.segment(3 * i, 3) - y.segment(3 * j, 3)).norm();
        if (d == 0.0) throw DomainError("bodies collide");
        potential += masses[i] * masses[j] / d;
      }
    }
    return 0.5 * kinetic - G * potential;
  };
  auto gradient = [masses, nq](const State& y) {
    State g = State::Zero(2 * nq);
    for (int i = 0; i < bodies; ++i) {
      g.segment(nq + 3 * i, 3) = y.segment(nq + 3 * i, 3) / masses[i];
      for (int j = 0; j < bodies; ++j) {
        if (j == i) continue;
        const Eigen::Vector3d r = y.segment(3 * i, 3) - y.segment(3 * j, 3);
        const double d = r.norm();
        if (d == 0.0) throw DomainError("bodies collide");
        g.segment(3 * i, 3) += G * masses[i] * masses[j] * r / (d * d * d);
      }
    }
    return g;
  };
  auto hessian = [masses, nq](const State& y) {
    Eigen::MatrixXd hs = Eigen::MatrixXd::Zero(2 * nq, 2 * nq);
    for (int i = 0; i < bodies; ++i) {
      hs.block(nq + 3 * i, nq + 3 * i, 3, 3) =
          Eigen::Matrix3d::Identity() / masses[i];
      for (int j = 0; j < i; ++j) {
        const Eigen::Vector3d r = y.segment(3 * i, 3) - y.segment(3 * j, 3);
        const double d = r.norm();
        if (d == 0.0) throw DomainError("bodies collide");
        const double d3 = d * d * d;
        const Eigen::Matrix3d k =
            G * masses[i] * masses[j] *
            (Eigen::Matrix3d::Identity() / d3 - 3.0 * r * r.transpose() / (d3 * d * d));
        hs.block(3 * i, 3 * i, 3, 3) += k;
        hs.block(3 * j, 3 * j, 3, 3) += k;
        hs.block(3 * i, 3 * j, 3, 3) -= k;
        hs.block(3 * j, 3 * i, 3, 3) -= k;
      }
    }
    return hs;
  };

  HamiltonianSystem sys(2 * nq, energy, gradient, hessian);
  sys.add_invariant("angular_momentum", [nq](const State& y) {
    Eigen::Vector3d total = Eigen::Vector3d::Zero();
    for (int i = 0; i < bodies; ++i) {
      const Eigen::Vector3d q = y.segment(3 * i, 3);
      const Eigen::Vector3d p = y.segment(nq + 3 * i, 3);
      total += q.cross(p);
    }
    return total.norm();
  });

  const double v = std::sqrt(10.0) / 20.0;
  State y0(2 * nq);
  y0 << -2.5, 0.0, 0.0, 2.5, 0.0, 0.0, 0.0, 0.0, 1e-9,  //
      0.0, -v, 0.0, 0.0, v, 0.0, 0.0, 0.0, 0.5;
  return ProblemSpec{"sitnikov",
                     std::move(sys),
                     y0,
                     0.5,
                     std::nullopt,
                     {{"N", bodies},
                      {"G", G},
                      {"m1", masses[0]},
                      {"m2", masses[1]},
                      {"m3", masses[2]},
                      {"e", 0.75},
                      {"d", 5.0},
                      {"h", 0.5},
                      {"t_max", 1500.0}},
                     1500.0};
}

ProblemSpec harmonic_oscillator(int m) {
  if (m < 1) throw InvalidArgument("harmonic oscillator needs m >= 1");
  const int dim = 2 * m;
  auto energy = [](const State& y) { return 0.5 * y.squaredNorm(); };
  auto gradient = [](const State& y) -> State { return y; };
  auto hessian = [dim](const State&) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Identity(dim, dim);
  };
  State y0 = State::Zero(dim);
  y0(0) = 1.0;
  return ProblemSpec{"harmonic",
                     HamiltonianSystem(dim, energy, gradient, hessian),
                     y0,
                     0.1,
                     2,
                     {{"m", m}},
                     2.0 * 3.14159265358979323846};
}

State harmonic_exact(const State& y0, double t) {
  const Eigen::Index m = y0.size() / 2;
  State out(y0.size());
  const double c = std::cos(t);
  const double s = std::sin(t);
  out.head(m) = c * y0.head(m) + s * y0.tail(m);
  out.tail(m) = c * y0.tail(m) - s * y0.head(m);
  return out;
}

ProblemSpec problem_by_name(const std::string& name) {
  if (name == "faou") return faou_problem();
  if (name == "fpu") return fpu_problem();
  if (name == "biot") return biot_problem();
  if (name == "sitnikov") return sitnikov_problem();
  if (name == "harmonic") return harmonic_oscillator(1);
  throw InvalidArgument("unknown problem '" + name + "'");
}

std::vector<std::string> problem_names() {
  return {"faou", "fpu", "biot", "sitnikov", "harmonic"};
}

}  // namespace hbvm
