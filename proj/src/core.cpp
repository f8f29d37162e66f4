#include "spherebot/core.hpp"

#include <cmath>

#include <fmt/format.h>

namespace spherebot {

void validate(const SystemParams& p) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(fmt::format("{} must be positive, got {}", name, v));
    }
  };
  positive(p.M, "M");
  positive(p.I, "I");
  positive(p.R_o, "R_o");
  positive(p.R_t, "R_t");
  positive(p.i, "i");
  if (!(p.j >= 0.0) || !std::isfinite(p.j)) {
    throw std::invalid_argument(fmt::format("j must be non-negative, got {}", p.j));
  }
}

SystemParams derive_params(double disk_radius_ratio, double rod_ratio,
                           double shell_mass, double shell_inertia_coeff) {
  auto in_open_range = [](double v, const char* name) {
    if (!(v > 0.0 && v < 2.0)) {
      throw std::invalid_argument(fmt::format("{} must lie in (0, 2), got {}", name, v));
    }
  };
  in_open_range(disk_radius_ratio, "disk_radius_ratio");
  in_open_range(rod_ratio, "rod_ratio");
  if (!(shell_mass > 0.0)) {
    throw std::invalid_argument(fmt::format("shell_mass must be positive, got {}", shell_mass));
  }
  if (!(shell_inertia_coeff > 0.0)) {
    throw std::invalid_argument(
        fmt::format("shell_inertia_coeff must be positive, got {}", shell_inertia_coeff));
  }

  // Geometric scale: R_o = 1, m = 1. Thin disk about its center: transverse
  // R_d^2/4, axial R_d^2/2.
  const double disk2 = disk_radius_ratio * disk_radius_ratio;
  const double transverse = disk2 / 4.0;
  const double axial = disk2 / 2.0;
  const double x0 = axial / rod_ratio;

  SystemParams p;
  p.length_unit = x0;
  p.M = shell_mass;
  p.R_o = 1.0 / x0;
  p.R_t = rod_ratio / x0;
  p.i = transverse / (x0 * x0);
  p.j = p.R_t - p.i;  // i + j = R_t exactly in program units
  p.I = shell_inertia_coeff * p.M * p.R_o * p.R_o;
  return p;
}

SystemParams default_params() {
  return derive_params(kDefaultDiskRadiusRatio, kDefaultRodRatio, kDefaultShellMass,
                       kDefaultShellInertiaCoeff);
}

bool check_feasibility(const SystemParams& params) { return params.feasible(); }

Vec3 rolling_velocity(const Vec3& Omega, const SystemParams& params) {
  return params.R_o * vertical().cross(Omega);
}

Vec3 shell_rate_for_velocity(const Vec3& V, double spin, const SystemParams& params) {
  Vec3 Omega = V.cross(vertical()) / params.R_o;
  Omega.z() = spin;
  return Omega;
}

FullState make_state(const Vec3& Omega, const Vec3& n, const Vec3& omega, const Vec3& r_s,
                     const SystemParams& params) {
  if (std::abs(n.norm() - 1.0) > kUnitNormTolerance) {
    throw std::invalid_argument(
        fmt::format("pendulum axis must be a unit vector, |n| = {:.17g}", n.norm()));
  }
  if (r_s.z() != 0.0) {
    throw std::invalid_argument("contact point must lie in the plane z = 0");
  }
  FullState s;
  s.Omega = Omega;
  s.n = n;
  s.omega = omega;
  s.r_s = r_s;
  s.V = rolling_velocity(Omega, params);
  return s;
}

FullState rolling_state(const Vec3& V, const SystemParams& params, const Vec3& r_s) {
  Vec3 planar = V;
  planar.z() = 0.0;
  return make_state(shell_rate_for_velocity(planar, 0.0, params), Vec3::UnitZ(),
                    Vec3::Zero(), r_s, params);
}

Vec3 pendulum_cm_velocity(const FullState& s, const SystemParams& params) {
  return params.R_o * vertical().cross(s.Omega) + params.R_t * s.omega.cross(s.n);
}

double total_energy(const FullState& s, const SystemParams& p) {
  const Vec3 V = rolling_velocity(s.Omega, p);
  const Vec3 v = pendulum_cm_velocity(s, p);
  const double axial_rate = s.omega.dot(s.n);
  const double shell = 0.5 * (p.M * V.squaredNorm() + p.I * s.Omega.squaredNorm());
  const double top =
      0.5 * (v.squaredNorm() + p.i * s.omega.squaredNorm() + p.j * axial_rate * axial_rate);
  return shell + top - p.R_t * s.n.z();
}

double noslip_residual(const FullState& s, const SystemParams& p) {
  return (s.V - rolling_velocity(s.Omega, p)).norm();
}

std::string describe(const SystemParams& p) {
  return fmt::format(
      "M={} I={} R_o={} R_t={} i={} j={} i0={} I0={} "
      "feasible={}",
      p.M, p.I, p.R_o, p.R_t, p.i, p.j, p.i0(), p.I0(), p.feasible() ? "yes" : "no");
}

}  // namespace spherebot
