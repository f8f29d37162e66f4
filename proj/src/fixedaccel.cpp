#include "spherebot/fixedaccel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

namespace spherebot {
namespace {

using std::numbers::pi;

constexpr int kEquilibriumScanPanels = 1024;

PlanarPendulumState rates(const PlanarPendulumState& s, double a0, const SystemParams& p) {
  return {s.theta_dot, theta_ddot(s, a0, p)};
}

PlanarPendulumState axpy(const PlanarPendulumState& s, const PlanarPendulumState& d, double h) {
  return {s.theta + h * d.theta, s.theta_dot + h * d.theta_dot};
}

double bisect(const std::function<double(double)>& g, double lo, double hi) {
  double g_lo = g(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm > 0.0) == (g_lo > 0.0)) {
      lo = mid;
      g_lo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Equilibrium classify(double theta, double a0, const SystemParams& p) {
  Equilibrium e;
  e.theta_star = theta;
  e.residual = std::abs(equilibrium_function(theta, a0, p));
  const double k = stiffness(theta, a0, p);
  if (k < 0.0) {
    e.kind = EquilibriumKind::Center;
    const double w = std::sqrt(-k);
    e.eigenvalues = {std::complex<double>(0.0, w), std::complex<double>(0.0, -w)};
  } else {
    e.kind = EquilibriumKind::Saddle;
    const double l = std::sqrt(k);
    e.eigenvalues = {std::complex<double>(l, 0.0), std::complex<double>(-l, 0.0)};
  }
  return e;
}

}  // namespace

const char* to_string(EquilibriumKind kind) {
  return kind == EquilibriumKind::Center ? "center" : "saddle";
}

double theta_ddot(const PlanarPendulumState& s, double a0, const SystemParams& p) {
  const double rr = p.coupling();
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  return (a0 * p.I0() - a0 * rr * c - rr * (p.R_o * sn * s.theta_dot * s.theta_dot + sn)) /
         (p.R_o * (p.i0() - rr * c));
}

double integral_C(const PlanarPendulumState& s, double a0, const SystemParams& p) {
  const double rr = p.coupling();
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  const double lever = p.i0() - rr * c;
  return -0.5 * p.R_o * lever * lever * s.theta_dot * s.theta_dot +
         rr * (p.i0() - 0.5 * rr * c) * (c - a0 * sn) +
         a0 * s.theta * (p.I0() * p.i0() + 0.5 * rr * rr) - a0 * rr * p.I0() * sn;
}

Vec3 fixed_accel_torque(const PlanarPendulumState& s, double a0, const SystemParams& p) {
  const double acc = theta_ddot(s, a0, p);
  const double Q2 = a0 / p.R_o * p.I0() +
                    p.coupling() * (std::cos(s.theta) * acc -
                                    std::sin(s.theta) * s.theta_dot * s.theta_dot);
  return {0.0, Q2, 0.0};
}

double equilibrium_function(double theta, double a0, const SystemParams& p) {
  const double rr = p.coupling();
  return a0 * p.I0() - a0 * rr * std::cos(theta) - rr * std::sin(theta);
}

double stiffness(double theta, double a0, const SystemParams& p) {
  const double rr = p.coupling();
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double num = equilibrium_function(theta, a0, p);
  const double den = p.R_o * (p.i0() - rr * c);
  const double num_d = a0 * rr * s - rr * c;
  const double den_d = p.R_o * rr * s;
  return (num_d * den - num * den_d) / (den * den);
}

std::vector<Equilibrium> find_equilibria(double a0, const SystemParams& p) {
  if (a0 < 0.0) {
    auto mirrored = find_equilibria(-a0, p);
    for (auto& e : mirrored) {
      e.theta_star = e.theta_star >= pi ? pi : -e.theta_star;
      e.residual = std::abs(equilibrium_function(e.theta_star, a0, p));
    }
    std::sort(mirrored.begin(), mirrored.end(),
              [](const Equilibrium& x, const Equilibrium& y) { return x.theta_star < y.theta_star; });
    return mirrored;
  }

  // Nodes are offset by half a panel so that neither 0 nor pi is a node.
  const double h = 2.0 * pi / kEquilibriumScanPanels;
  const double start = -pi + 0.5 * h;
  auto g = [&](double th) { return equilibrium_function(th, a0, p); };

  std::vector<double> roots;
  double prev = start;
  double g_prev = g(prev);
  for (int k = 1; k <= kEquilibriumScanPanels; ++k) {
    const double th = start + k * h;
    const double gk = g(th);
    if (gk == 0.0) {
      roots.push_back(th);
    } else if (g_prev != 0.0 && (gk > 0.0) != (g_prev > 0.0)) {
      roots.push_back(bisect(g, prev, th));
    }
    prev = th;
    g_prev = gk;
  }

  std::vector<Equilibrium> out;
  for (double r : roots) {
    // Map to (-pi, pi].
    if (r > pi) r -= 2.0 * pi;
    if (r <= -pi + 1e-12) r = pi;
    if (std::abs(r - pi) < 1e-12) r = pi;
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const Equilibrium& e) {
      return std::abs(e.theta_star - r) < 1e-10;
    });
    if (!duplicate) out.push_back(classify(r, a0, p));
  }
  std::sort(out.begin(), out.end(),
            [](const Equilibrium& x, const Equilibrium& y) { return x.theta_star < y.theta_star; });
  return out;
}

PlanarPendulumState reduced_step(const PlanarPendulumState& s, double a0, double dt,
                                 const SystemParams& p) {
  const auto k1 = rates(s, a0, p);
  const auto k2 = rates(axpy(s, k1, 0.5 * dt), a0, p);
  const auto k3 = rates(axpy(s, k2, 0.5 * dt), a0, p);
  const auto k4 = rates(axpy(s, k3, dt), a0, p);
  return {s.theta + dt / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta),
          s.theta_dot +
              dt / 6.0 * (k1.theta_dot + 2.0 * k2.theta_dot + 2.0 * k3.theta_dot + k4.theta_dot)};
}

std::vector<ReducedSample> integrate_reduced(const PlanarPendulumState& start, double a0,
                                             double horizon, double dt, const SystemParams& p) {
  if (!(dt > 0.0) || !(horizon >= 0.0)) {
    throw std::invalid_argument("integrate_reduced needs dt > 0 and horizon >= 0");
  }
  const long steps = std::max(1L, static_cast<long>(std::ceil(horizon / dt - 1e-9)));
  const double h = horizon / static_cast<double>(steps);
  std::vector<ReducedSample> out;
  out.reserve(steps + 1);
  out.push_back({0.0, start});
  PlanarPendulumState s = start;
  for (long k = 1; k <= steps; ++k) {
    s = reduced_step(s, a0, h, p);
    out.push_back({k == steps ? horizon : static_cast<double>(k) * h, s});
  }
  return out;
}

std::vector<SectionCrossing> section_crossings(const PlanarPendulumState& start, double a0,
                                               double section, std::size_t count, double horizon,
                                               double dt, const SystemParams& p) {
  std::vector<SectionCrossing> out;
  PlanarPendulumState s = start;
  double t = 0.0;
  while (out.size() < count && t < horizon) {
    const PlanarPendulumState next = reduced_step(s, a0, dt, p);
    if (s.theta < section && next.theta >= section) {
      auto miss = [&](double h) { return reduced_step(s, a0, h, p).theta - section; };
      const double h = next.theta == section ? dt : bisect(miss, 0.0, dt);
      const PlanarPendulumState at = reduced_step(s, a0, h, p);
      if (at.theta_dot > 0.0) out.push_back({t + h, at});
    }
    s = next;
    t += dt;
  }
  return out;
}

PhasePortrait phase_portrait(double a0, const SystemParams& p, const GridSpec& grid, double dt) {
  if (grid.theta_points < 2 || grid.theta_dot_points < 2) {
    throw std::invalid_argument("phase grid needs at least two points per axis");
  }
  PhasePortrait out;
  out.a0 = a0;
  const auto [t_lo, t_hi] = grid.theta_range;
  const auto [d_lo, d_hi] = grid.theta_dot_range;
  for (std::size_t i = 0; i < grid.theta_points; ++i) {
    out.thetas.push_back(t_lo + (t_hi - t_lo) * static_cast<double>(i) /
                                    static_cast<double>(grid.theta_points - 1));
  }
  for (std::size_t i = 0; i < grid.theta_dot_points; ++i) {
    out.theta_dots.push_back(d_lo + (d_hi - d_lo) * static_cast<double>(i) /
                                        static_cast<double>(grid.theta_dot_points - 1));
  }
  out.C.reserve(out.thetas.size() * out.theta_dots.size());
  for (double rate : out.theta_dots) {
    for (double th : out.thetas) out.C.push_back(integral_C({th, rate}, a0, p));
  }

  out.equilibria = find_equilibria(a0, p);
  out.rest_level = integral_C({0.0, 0.0}, a0, p);
  for (const auto& e : out.equilibria) {
    if (e.kind == EquilibriumKind::Saddle) {
      out.separatrix_levels.push_back(integral_C({e.theta_star, 0.0}, a0, p));
    }
  }
  const auto [c_min, c_max] = std::minmax_element(out.C.begin(), out.C.end());
  if (grid.n_levels > 0) {
    for (std::size_t k = 0; k < grid.n_levels; ++k) {
      out.levels.push_back(*c_min + (*c_max - *c_min) * (static_cast<double>(k) + 0.5) /
                                        static_cast<double>(grid.n_levels));
    }
  }

  // Trajectory through the state of rest. It circles the center nearest to
  // theta = 0 when one exists.
  const PlanarPendulumState rest{0.0, 0.0};
  if (std::abs(theta_ddot(rest, a0, p)) < 1e-15) {
    out.rest_orbit = {{0.0, rest}};
    return out;
  }
  const Equilibrium* center = nullptr;
  for (const auto& e : out.equilibria) {
    if (e.kind == EquilibriumKind::Center &&
        (!center || std::abs(e.theta_star) < std::abs(center->theta_star))) {
      center = &e;
    }
  }
  if (center) {
    const double direction = center->theta_star >= 0.0 ? 1.0 : -1.0;
    // Mirror so the crossing search always looks for increasing theta.
    const auto crossings =
        section_crossings(rest, direction * a0, std::abs(center->theta_star), 2, 500.0, dt, p);
    if (crossings.size() == 2) {
      out.rest_period = crossings[1].t - crossings[0].t;
      out.rest_orbit = integrate_reduced(rest, a0, out.rest_period, dt, p);
      return out;
    }
  }
  out.rest_orbit = integrate_reduced(rest, a0, 20.0, dt, p);
  return out;
}

void write_phase_csv(std::ostream& os, const PhasePortrait& portrait) {
  os << "theta,theta_dot,C\n";
  const std::size_t nt = portrait.thetas.size();
  for (std::size_t j = 0; j < portrait.theta_dots.size(); ++j) {
    for (std::size_t i = 0; i < nt; ++i) {
      fmt::print(os, "{},{},{}\n", portrait.thetas[i], portrait.theta_dots[j],
                 portrait.C[j * nt + i]);
    }
  }
}

void write_rest_orbit_csv(std::ostream& os, const PhasePortrait& portrait,
                          const SystemParams& params) {
  os << "t,theta,theta_dot,C\n";
  for (const auto& s : portrait.rest_orbit) {
    fmt::print(os, "{},{},{},{}\n", s.t, s.state.theta, s.state.theta_dot,
               integral_C(s.state, portrait.a0, params));
  }
}

void write_equilibria_json(std::ostream& os, const PhasePortrait& portrait,
                           std::span<const std::string> provenance) {
  nlohmann::ordered_json doc;
  if (!provenance.empty()) {
    doc["provenance"] = std::vector<std::string>(provenance.begin(), provenance.end());
  }
  doc["a0"] = portrait.a0;
  auto& list = doc["equilibria"] = nlohmann::ordered_json::array();
  for (const auto& e : portrait.equilibria) {
    nlohmann::ordered_json rec;
    rec["theta_star"] = e.theta_star;
    rec["kind"] = to_string(e.kind);
    rec["eigenvalues"] = {{e.eigenvalues[0].real(), e.eigenvalues[0].imag()},
                          {e.eigenvalues[1].real(), e.eigenvalues[1].imag()}};
    rec["residual"] = e.residual;
    list.push_back(rec);
  }
  doc["rest_level"] = portrait.rest_level;
  doc["rest_period"] = portrait.rest_period;
  doc["separatrix_levels"] = portrait.separatrix_levels;
  doc["levels"] = portrait.levels;
  os << doc.dump(2) << '\n';
}

}  // namespace spherebot
