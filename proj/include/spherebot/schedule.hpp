#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "spherebot/core.hpp"

namespace spherebot {

/// Torque as a function of absolute time.
using TorqueLaw = std::function<Vec3(double)>;

/// Pendulum and contact-point state the planner expects at a sample.
struct PlannedState {
  Vec3 n = Vec3::UnitZ();
  Vec3 omega = Vec3::Zero();
  Vec3 V = Vec3::Zero();
};

/// Analytic torque law valid on [t0, t1].
struct TorqueSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  TorqueLaw law;
};

/// Time-sampled control torque, optionally carrying the analytic laws it
/// was sampled from and the planned trajectory that produced it.
///
/// Samples are non-decreasing in time. A repeated time stamp marks a torque
/// jump (e.g. the junction between two gaits).
struct TorqueSchedule {
  std::vector<double> t;
  std::vector<Vec3> Q;
  std::vector<PlannedState> plan;       ///< empty, or one entry per sample
  std::vector<TorqueSegment> segments;  ///< empty for purely sampled schedules
  std::vector<std::string> warnings;

  bool empty() const { return t.empty(); }
  double start() const { return t.front(); }
  double end() const { return t.back(); }

  /// Continuous pieces of the schedule. With analytic segments these are the
  /// segments themselves; otherwise the samples are split at repeated time
  /// stamps and each piece interpolates linearly.
  std::vector<TorqueSegment> pieces() const;

  /// Appends `next`, whose times must start where this schedule ends.
  void append(const TorqueSchedule& next);

  /// Q held constant over [t0, t1], sampled every dt.
  static TorqueSchedule constant(const Vec3& Q, double t0, double t1, double dt);

  /// Throws std::invalid_argument on size mismatches or decreasing times.
  void validate() const;
};

/// Writes `t,Q1,Q2,Q3` (plus planned n, omega, V columns when available).
void write_schedule_csv(std::ostream& os, const TorqueSchedule& schedule);

/// Reads a CSV with at least the columns t,Q1,Q2,Q3. Lines starting with
/// '#' are ignored. Throws std::runtime_error naming the line on bad input.
TorqueSchedule read_schedule_csv(std::istream& is);

}  // namespace spherebot
