#pragma once

// Parameters, state and energy of a spherical shell rolling without slipping
// on a horizontal plane, driven by an axisymmetric pendulum (a Lagrange top)
// hinged at the shell's center.
//
// Everything is in program units: the pendulum mass m is the unit of mass,
// t0 = sqrt((i+j)/(m g R_t)) the unit of time and x0 = g t0^2 the unit of
// length. In these units g = 1 and i + j = R_t. The z axis points down.

#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace spherebot {

using Vec3 = Eigen::Vector3d;

/// Unit vertical k = (0, 0, 1), pointing down.
inline Vec3 vertical() { return Vec3::UnitZ(); }

/// Raised when the controlled motion cannot be realized: the inverse-dynamics
/// matrix is singular or too ill-conditioned to trust.
class InfeasibleConfiguration : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SystemParams {
  double M = 0.0;    ///< shell mass
  double I = 0.0;    ///< shell moment of inertia about its center
  double R_o = 0.0;  ///< shell radius
  double R_t = 0.0;  ///< distance from shell center to pendulum center of mass
  double i = 0.0;    ///< pendulum transverse inertia about its center of mass
  double j = 0.0;    ///< axial inertia excess; axial inertia is i + j

  /// Length unit x0 measured in shell radii. Informational only; set by
  /// derive_params so outputs can be converted back to geometric scale.
  double length_unit = 1.0;

  double i0() const { return i + R_t * R_t; }
  double I0() const { return I + (1.0 + M) * R_o * R_o; }
  double coupling() const { return R_o * R_t; }

  /// i0 > R_o R_t: the inverse-dynamics matrix is invertible.
  bool feasible() const { return i0() > coupling(); }
};

/// Throws std::invalid_argument unless M, I, R_o, R_t, i > 0 and j >= 0.
void validate(const SystemParams& params);

/// Pendulum modeled as a thin disk of radius disk_radius_ratio*R_o on a
/// massless rod of length rod_ratio*R_o. The shell inertia is
/// shell_inertia_coeff * M * R_o^2. Result is converted to program units.
/// Infeasible geometry is not an error; check feasible() on the result.
SystemParams derive_params(double disk_radius_ratio, double rod_ratio,
                           double shell_mass, double shell_inertia_coeff);

/// Default geometry: R_d = 0.92 R_o, R_t = 0.25 R_o, a thin shell
/// (I = 2/3 M R_o^2) of mass 0.1 m.
SystemParams default_params();

inline constexpr double kDefaultDiskRadiusRatio = 0.92;
inline constexpr double kDefaultRodRatio = 0.25;
inline constexpr double kDefaultShellMass = 0.1;
inline constexpr double kDefaultShellInertiaCoeff = 2.0 / 3.0;

bool check_feasibility(const SystemParams& params);

inline constexpr double kUnitNormTolerance = 1e-9;

struct FullState {
  Vec3 Omega = Vec3::Zero();  ///< shell angular velocity
  Vec3 n = Vec3::UnitZ();     ///< pendulum symmetry axis (unit)
  Vec3 omega = Vec3::Zero();  ///< pendulum angular velocity
  Vec3 r_s = Vec3::Zero();    ///< contact point position, r_s.z() == 0
  Vec3 V = Vec3::Zero();      ///< contact point velocity, R_o k x Omega
};

/// V = R_o k x Omega.
Vec3 rolling_velocity(const Vec3& Omega, const SystemParams& params);

/// Shell angular velocity that rolls with horizontal velocity V and spins
/// about the vertical at rate `spin`.
Vec3 shell_rate_for_velocity(const Vec3& V, double spin,
                             const SystemParams& params);

/// Builds a state with V derived from Omega. Throws std::invalid_argument
/// if |n| differs from 1 by more than kUnitNormTolerance or r_s is not in
/// the plane.
FullState make_state(const Vec3& Omega, const Vec3& n, const Vec3& omega,
                     const Vec3& r_s, const SystemParams& params);

/// State rolling with horizontal velocity V, pendulum hanging at rest.
FullState rolling_state(const Vec3& V, const SystemParams& params,
                        const Vec3& r_s = Vec3::Zero());

/// Velocity of the pendulum's center of mass, R_o k x Omega + R_t omega x n.
Vec3 pendulum_cm_velocity(const FullState& state, const SystemParams& params);

/// Kinetic plus potential energy. The potential is -R_t n_z because the
/// shell center stays at constant height and z points down.
double total_energy(const FullState& state, const SystemParams& params);

/// |V - R_o k x Omega|.
double noslip_residual(const FullState& state, const SystemParams& params);

std::string describe(const SystemParams& params);

}  // namespace spherebot
