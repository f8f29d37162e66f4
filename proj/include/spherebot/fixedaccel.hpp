#pragma once

// Straight-line motion with constant acceleration a0 along x: the shell rate
// is prescribed, the pendulum swings in the xz plane and obeys
//
//   theta'' = [a0 I0 - a0 R_o R_t cos - R_o R_t (R_o sin theta'^2 + sin)]
//             / [R_o (i0 - R_o R_t cos)].
//
// The reduced flow conserves a quantity C quadratic in theta'.

#include <array>
#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spherebot/core.hpp"

namespace spherebot {

struct PlanarPendulumState {
  double theta = 0.0;
  double theta_dot = 0.0;
};

enum class EquilibriumKind { Center, Saddle };

const char* to_string(EquilibriumKind kind);

struct Equilibrium {
  double theta_star = 0.0;
  EquilibriumKind kind = EquilibriumKind::Center;
  std::array<std::complex<double>, 2> eigenvalues;
  double residual = 0.0;  ///< |equilibrium_function(theta_star)|
};

double theta_ddot(const PlanarPendulumState& s, double a0, const SystemParams& params);

/// Conserved along theta_ddot.
double integral_C(const PlanarPendulumState& s, double a0, const SystemParams& params);

/// Torque holding the prescribed acceleration: (0, Q2, 0) with
/// Q2 = (a0 / R_o) I0 + R_o R_t (cos theta'' - sin theta'^2).
Vec3 fixed_accel_torque(const PlanarPendulumState& s, double a0, const SystemParams& params);

/// a0 I0 - a0 R_o R_t cos(theta) - R_o R_t sin(theta); zero at equilibria.
double equilibrium_function(double theta, double a0, const SystemParams& params);

/// d theta'' / d theta at theta' = 0, differentiated analytically.
double stiffness(double theta, double a0, const SystemParams& params);

/// Equilibria on [-pi, pi) (the point pi is reported, -pi is not), sorted by
/// angle, found by a 1024-panel sign scan and bisection. Negative a0 is
/// handled by the symmetry theta -> -theta.
std::vector<Equilibrium> find_equilibria(double a0, const SystemParams& params);

/// One RK4 step of the reduced flow.
PlanarPendulumState reduced_step(const PlanarPendulumState& s, double a0, double dt,
                                 const SystemParams& params);

struct ReducedSample {
  double t = 0.0;
  PlanarPendulumState state;
};

std::vector<ReducedSample> integrate_reduced(const PlanarPendulumState& start, double a0,
                                             double horizon, double dt,
                                             const SystemParams& params);

/// Crossing of theta = section with theta' > 0.
struct SectionCrossing {
  double t = 0.0;
  PlanarPendulumState state;
};

/// Upward crossings of theta = section, located to RK4 accuracy by secant
/// iteration on a partial step. Stops after `count` crossings or at horizon.
std::vector<SectionCrossing> section_crossings(const PlanarPendulumState& start, double a0,
                                               double section, std::size_t count, double horizon,
                                               double dt, const SystemParams& params);

struct PhasePortrait {
  double a0 = 0.0;
  std::vector<double> thetas;
  std::vector<double> theta_dots;
  std::vector<double> C;  ///< C[i_dot * thetas.size() + i_theta]
  std::vector<Equilibrium> equilibria;
  std::vector<ReducedSample> rest_orbit;  ///< trajectory through (0, 0)
  double rest_period = 0.0;               ///< 0 if the orbit is not closed
  double rest_level = 0.0;                ///< C(0, 0)
  std::vector<double> separatrix_levels;  ///< C at each saddle
  std::vector<double> levels;             ///< evenly spaced contour levels
};

struct GridSpec {
  std::pair<double, double> theta_range{-3.5, 3.5};
  std::pair<double, double> theta_dot_range{-2.0, 2.0};
  std::size_t theta_points = 201;
  std::size_t theta_dot_points = 161;
  std::size_t n_levels = 20;
};

PhasePortrait phase_portrait(double a0, const SystemParams& params, const GridSpec& grid = {},
                             double dt = 1e-3);

/// Rows `theta,theta_dot,C` over the grid.
void write_phase_csv(std::ostream& os, const PhasePortrait& portrait);

/// Rows `t,theta,theta_dot,C` along the rest orbit.
void write_rest_orbit_csv(std::ostream& os, const PhasePortrait& portrait,
                          const SystemParams& params);

/// JSON document with equilibria records (theta_star, kind, eigenvalues) and
/// the distinguished levels. JSON has no comments, so provenance lines go
/// under a "provenance" key.
void write_equilibria_json(std::ostream& os, const PhasePortrait& portrait,
                           std::span<const std::string> provenance = {});

}  // namespace spherebot
