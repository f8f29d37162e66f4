#pragma once

// Gaits: maneuvers performed during exactly one pendulum oscillation
//
//   theta(t) = alpha sin^2(pi t / T),   0 <= t <= T,
//
// so the pendulum hangs at rest at both ends and maneuvers can be chained.
// The swing happens in a vertical plane at angle phi to the x axis; the ball
// accelerates along s = (cos phi, sin phi, 0) only.

#include <iosfwd>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "spherebot/core.hpp"
#include "spherebot/schedule.hpp"

namespace spherebot {

enum class GaitKind { Accelerate, Brake, Turn };

const char* to_string(GaitKind kind);

struct GaitSpec {
  double alpha = 0.0;  ///< oscillation amplitude; |alpha| < pi
  double T = 1.0;      ///< duration of the maneuver
  double phi = 0.0;    ///< swing-plane angle from the current heading
  GaitKind kind = GaitKind::Accelerate;

  /// Amplitude actually applied: a brake swings the other way.
  double signed_amplitude() const { return kind == GaitKind::Brake ? -alpha : alpha; }

  /// Throws std::invalid_argument unless T > 0 and |alpha| < pi.
  void validate() const;
};

struct ThetaProfile {
  double theta = 0.0;
  double theta_dot = 0.0;
  double theta_ddot = 0.0;
};

/// Throws std::out_of_range for t outside [0, T].
ThetaProfile theta_profile(double t, double alpha, double T);

/// Contact-point acceleration produced by a planar pendulum motion:
/// a = R_o [theta''(i0 - R_o R_t cos) + R_o R_t theta'^2 sin + R_t sin] / (I0 - R_o R_t cos).
double planar_acceleration(const ThetaProfile& profile, const SystemParams& params);

/// Torque magnitude about the swing-plane normal for a planar motion:
/// Q = (a / R_o) I0 + R_o R_t (cos theta'' - sin theta'^2).
double planar_torque(const ThetaProfile& profile, double a, const SystemParams& params);

double gait_acceleration(double t, double alpha, double T, const SystemParams& params);

/// Panels of the composite Simpson rule used for every gait integral.
inline constexpr int kQuadraturePanels = 2048;

/// Speed gained over one gait, the integral of gait_acceleration over [0, T].
double delta_v(double alpha, double T, const SystemParams& params);

/// Heading change of a perpendicular (phi = pi/2) gait started at speed V_s:
/// atan(delta_v / V_s). Throws std::invalid_argument unless V_s > 0.
double rotation_angle(double alpha, double T, double V_s, const SystemParams& params);

enum class SurfaceKind { DeltaV, Psi };

const char* to_string(SurfaceKind kind);

/// delta_v or rotation_angle, depending on kind.
double surface_value(SurfaceKind kind, double alpha, double T, const SystemParams& params,
                     double V_s = 0.0);

/// The requested response lies outside what a gait of this duration can do.
class UnreachableTarget : public std::range_error {
public:
  UnreachableTarget(const std::string& what, double achievable_max)
      : std::range_error(what), achievable_max_(achievable_max) {}
  double achievable_max() const { return achievable_max_; }

private:
  double achievable_max_;
};

struct ResponsePeak {
  double alpha = 0.0;
  double value = 0.0;
};

/// Largest response over alpha in (0, pi). By antisymmetry the achievable
/// range is [-value, value].
ResponsePeak max_response(SurfaceKind kind, double T, const SystemParams& params,
                          double V_s = 0.0);

/// Every alpha in (0, alpha_max) where the response crosses `target`,
/// ascending. Found by a uniform sign scan refined by bisection.
std::vector<double> alpha_roots(double target, double T, const SystemParams& params,
                                SurfaceKind kind = SurfaceKind::DeltaV, double V_s = 0.0,
                                double alpha_max = std::numbers::pi);

/// Smallest-|alpha| amplitude producing `target` in a gait of duration T.
/// Negative targets give negative amplitudes. Throws UnreachableTarget.
double solve_alpha(double target, double T, const SystemParams& params,
                   SurfaceKind kind = SurfaceKind::DeltaV, double V_s = 0.0);

struct ResponseSurface {
  SurfaceKind kind = SurfaceKind::DeltaV;
  double V_s = 0.0;
  std::vector<double> alphas;
  std::vector<double> periods;
  std::vector<double> values;  ///< values[iT * alphas.size() + ia]

  double at(std::size_t ia, std::size_t iT) const { return values[iT * alphas.size() + ia]; }
};

/// n evenly spaced points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Evaluates the response on alphas x periods. Grid points are independent
/// and are spread over `threads` workers (0 = hardware concurrency).
ResponseSurface sample_surface(SurfaceKind kind, std::span<const double> alphas,
                               std::span<const double> periods, const SystemParams& params,
                               double V_s = 0.0, unsigned threads = 0);

/// Grid used by the `surface` command: alpha in [-3, 3] (241) x T in [0.5, 10] (96).
ResponseSurface default_surface(SurfaceKind kind, const SystemParams& params, double V_s = 0.0);

/// Rows `alpha,T,value`.
void write_surface_csv(std::ostream& os, const ResponseSurface& surface);

/// Samples one gait every dt (dt must divide T). phi is taken relative to
/// `heading`, the direction of motion. Torque is normal to the swing plane:
/// Q = Q_mag (-sin phi, cos phi, 0). Times start at t0; the planned velocity
/// starts at V0.
TorqueSchedule gait_torque_schedule(const GaitSpec& gait, const SystemParams& params, double dt,
                                    double t0 = 0.0, const Vec3& V0 = Vec3::Zero(),
                                    double heading = 0.0);

/// Concatenates gaits. Each gait's phi is measured from the heading at the
/// start of that gait, tracked from the planned velocity. A brake larger than
/// the current speed adds a warning (the ball reverses).
TorqueSchedule compose(std::span<const GaitSpec> gaits, const SystemParams& params, double dt,
                       const Vec3& V0 = Vec3::Zero(), double heading = 0.0);

/// A maneuver as requested by a user: accelerate/brake by a speed change,
/// or turn by an angle (radians, positive = counter-clockwise).
struct Maneuver {
  GaitKind kind = GaitKind::Accelerate;
  double target = 0.0;
  double T = 1.0;
};

/// Solves the amplitude of every maneuver, tracking the planned velocity so
/// each turn uses the speed it actually starts from.
std::vector<GaitSpec> plan_maneuvers(std::span<const Maneuver> maneuvers,
                                     const SystemParams& params, const Vec3& V0 = Vec3::Zero(),
                                     double heading = 0.0);

}  // namespace spherebot
