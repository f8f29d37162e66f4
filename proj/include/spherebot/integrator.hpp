#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spherebot/core.hpp"
#include "spherebot/schedule.hpp"

namespace spherebot {

inline constexpr double kDefaultStep = 1e-3;

struct LogSample {
  double t = 0.0;
  FullState state;
  Vec3 Q = Vec3::Zero();
  double energy = 0.0;
  double n_drift = 0.0;  ///< |n| - 1 before renormalization at this step
  double noslip_residual = 0.0;

  double speed() const { return std::hypot(state.V.x(), state.V.y()); }
  double heading() const { return std::atan2(state.V.y(), state.V.x()); }
};

struct TrajectoryLog {
  std::vector<LogSample> samples;

  const LogSample& front() const { return samples.front(); }
  const LogSample& back() const { return samples.back(); }
};

struct StepOutcome {
  FullState state;
  double n_drift = 0.0;
};

/// One classical RK4 step of (Omega, omega, n, r_s) under torque(t) from
/// time t. V is recomputed from Omega and n is projected back to the unit
/// sphere afterwards.
StepOutcome advance(const FullState& state, const TorqueLaw& torque, double t, double dt,
                    const SystemParams& params);

/// RK4 step under a constant torque.
FullState step(const FullState& state, const Vec3& Q, double dt, const SystemParams& params);

/// Integrates under a torque schedule from its start time for `horizon`
/// (default: the whole schedule). The schedule's continuous pieces are
/// never stepped across; each is divided into equal steps no longer than dt.
/// Throws std::invalid_argument if the horizon runs past the schedule or dt
/// exceeds the sample spacing of a purely sampled schedule.
TrajectoryLog simulate(const FullState& initial, const TorqueSchedule& schedule, double dt,
                       const SystemParams& params, std::optional<double> horizon = {});

/// Twice-differentiable planar law of motion of the contact point.
struct PlanarPath {
  std::function<Vec3(double)> position;
  std::function<Vec3(double)> velocity;
  std::function<Vec3(double)> acceleration;
};

/// x(t) = x0 + v t, constant velocity.
PlanarPath straight_line_path(const Vec3& velocity, const Vec3& origin = Vec3::Zero());

/// x(t) = a0 t^2 / 2 along the x axis.
PlanarPath uniform_acceleration_path(double a0);

/// Counter-clockwise circle through the origin with initial velocity along +x.
PlanarPath circular_path(double radius, double speed);

/// Drives the contact point along `path`: at every stage the torque comes
/// from inverse dynamics with the path's acceleration. The logged Q is the
/// torque required at each sample. Throws std::invalid_argument when the
/// initial state does not match the path at t = 0, and InfeasibleConfiguration
/// if the configuration becomes uncontrollable.
TrajectoryLog track_prescribed(const PlanarPath& path, double horizon, double dt,
                               const SystemParams& params, const FullState& initial);

/// Power delivered by the motor, Q . (omega - Omega).
double motor_power(const FullState& state, const Vec3& Q);

/// Column header of the trajectory CSV.
inline constexpr const char* kTrajectoryColumns =
    "t,x,y,V1,V2,n1,n2,n3,w1,w2,w3,Om1,Om2,Om3,Q1,Q2,Q3,energy,n_drift,noslip_res";

/// Writes `preamble` as '#' comment lines, then the column header and rows.
void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log,
                          std::span<const std::string> preamble = {});

}  // namespace spherebot
