#include "spherebot/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "spherebot/solver.hpp"

namespace spherebot {
namespace {

// Time derivative of the integrated part of the state.
struct Rates {
  Vec3 Omega;
  Vec3 omega;
  Vec3 n;
  Vec3 r;
};

FullState offset(const FullState& s, const Rates& d, double h, const SystemParams& p) {
  FullState out;
  out.Omega = s.Omega + h * d.Omega;
  out.omega = s.omega + h * d.omega;
  out.n = s.n + h * d.n;
  out.r_s = s.r_s + h * d.r;
  out.V = rolling_velocity(out.Omega, p);
  return out;
}

template <typename Derivative>
StepOutcome rk4(const FullState& s, double t, double h, const SystemParams& p,
                const Derivative& deriv) {
  const Rates k1 = deriv(t, s);
  const Rates k2 = deriv(t + 0.5 * h, offset(s, k1, 0.5 * h, p));
  const Rates k3 = deriv(t + 0.5 * h, offset(s, k2, 0.5 * h, p));
  const Rates k4 = deriv(t + h, offset(s, k3, h, p));

  FullState out;
  out.Omega = s.Omega + h / 6.0 * (k1.Omega + 2.0 * k2.Omega + 2.0 * k3.Omega + k4.Omega);
  out.omega = s.omega + h / 6.0 * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega);
  out.n = s.n + h / 6.0 * (k1.n + 2.0 * k2.n + 2.0 * k3.n + k4.n);
  out.r_s = s.r_s + h / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
  out.r_s.z() = 0.0;

  const double norm = out.n.norm();
  out.n /= norm;
  out.V = rolling_velocity(out.Omega, p);
  return {out, norm - 1.0};
}

LogSample make_sample(double t, const FullState& s, const Vec3& Q, double drift,
                      const SystemParams& p) {
  LogSample row;
  row.t = t;
  row.state = s;
  row.Q = Q;
  row.energy = total_energy(s, p);
  row.n_drift = drift;
  row.noslip_residual = noslip_residual(s, p);
  return row;
}

long step_count(double span, double dt) {
  return std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9)));
}

}  // namespace

StepOutcome advance(const FullState& state, const TorqueLaw& torque, double t, double dt,
                    const SystemParams& params) {
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
  return rk4(state, t, dt, params, [&](double at, const FullState& s) {
    const StateRates d = forward_dynamics(s, torque(at), params);
    return Rates{d.Omega_dot, d.omega_dot, d.n_dot, rolling_velocity(s.Omega, params)};
  });
}

FullState step(const FullState& state, const Vec3& Q, double dt, const SystemParams& params) {
  return advance(state, [&Q](double) { return Q; }, 0.0, dt, params).state;
}

TrajectoryLog simulate(const FullState& initial, const TorqueSchedule& schedule, double dt,
                       const SystemParams& params, std::optional<double> horizon) {
  schedule.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
  const double t_start = schedule.start();
  const double span = horizon.value_or(schedule.end() - t_start);
  if (!(span > 0.0) || t_start + span > schedule.end() * (1.0 + 1e-12) + 1e-12) {
    throw std::invalid_argument(fmt::format(
        "horizon {} does not fit the torque schedule [{}, {}]", span, t_start, schedule.end()));
  }
  if (schedule.segments.empty()) {
    for (std::size_t k = 1; k < schedule.t.size(); ++k) {
      const double gap = schedule.t[k] - schedule.t[k - 1];
      if (gap > 0.0 && dt > gap * (1.0 + 1e-9)) {
        throw std::invalid_argument(fmt::format(
            "step {} exceeds the torque sample spacing {} at t = {}", dt, gap, schedule.t[k - 1]));
      }
    }
  }
  const double t_stop = t_start + span;

  TrajectoryLog log;
  FullState s = initial;
  s.V = rolling_velocity(s.Omega, params);
  const auto pieces = schedule.pieces();
  log.samples.push_back(make_sample(t_start, s, pieces.front().law(t_start), 0.0, params));

  for (const TorqueSegment& piece : pieces) {
    const double a = piece.t0;
    const double b = std::min(piece.t1, t_stop);
    if (b <= a) continue;
    const long steps = step_count(b - a, dt);
    const double h = (b - a) / static_cast<double>(steps);
    for (long k = 0; k < steps; ++k) {
      const double t = a + static_cast<double>(k) * h;
      const StepOutcome next = advance(s, piece.law, t, h, params);
      s = next.state;
      const double t_next = k + 1 == steps ? b : a + static_cast<double>(k + 1) * h;
      log.samples.push_back(make_sample(t_next, s, piece.law(t_next), next.n_drift, params));
    }
    if (b >= t_stop) break;
  }
  return log;
}

PlanarPath straight_line_path(const Vec3& velocity, const Vec3& origin) {
  return {[=](double t) -> Vec3 { return origin + t * velocity; },
          [=](double) -> Vec3 { return velocity; },
          [](double) -> Vec3 { return Vec3::Zero(); }};
}

PlanarPath uniform_acceleration_path(double a0) {
  return {[a0](double t) -> Vec3 { return {0.5 * a0 * t * t, 0.0, 0.0}; },
          [a0](double t) -> Vec3 { return {a0 * t, 0.0, 0.0}; },
          [a0](double) -> Vec3 { return {a0, 0.0, 0.0}; }};
}

PlanarPath circular_path(double radius, double speed) {
  const double rate = speed / radius;
  return {[=](double t) -> Vec3 {
            return {radius * std::sin(rate * t), radius * (1.0 - std::cos(rate * t)), 0.0};
          },
          [=](double t) -> Vec3 {
            return {speed * std::cos(rate * t), speed * std::sin(rate * t), 0.0};
          },
          [=](double t) -> Vec3 {
            return {-speed * rate * std::sin(rate * t), speed * rate * std::cos(rate * t), 0.0};
          }};
}

TrajectoryLog track_prescribed(const PlanarPath& path, double horizon, double dt,
                               const SystemParams& params, const FullState& initial) {
  if (!(dt > 0.0) || !(horizon > 0.0)) {
    throw std::invalid_argument("track_prescribed needs dt > 0 and horizon > 0");
  }
  const Vec3 V0 = rolling_velocity(initial.Omega, params);
  const double pos_err = (initial.r_s - path.position(0.0)).norm();
  const double vel_err = (V0 - path.velocity(0.0)).norm();
  if (pos_err > 1e-9 || vel_err > 1e-9) {
    throw std::invalid_argument(fmt::format(
        "initial state does not match the path at t = 0 (position error {:.3g}, velocity error "
        "{:.3g})",
        pos_err, vel_err));
  }

  auto deriv = [&](double t, const FullState& s) {
    const Vec3 Omega_dot = prescribed_shell_rate(path.acceleration(t), params);
    const InverseDynamics inv = inverse_dynamics_for_shell_rate(s, Omega_dot, params);
    return Rates{Omega_dot, inv.omega_dot, inv.n_dot, rolling_velocity(s.Omega, params)};
  };
  auto torque_at = [&](double t, const FullState& s) {
    return inverse_dynamics(s, path.acceleration(t), params).Q;
  };

  TrajectoryLog log;
  FullState s = initial;
  s.V = V0;
  log.samples.push_back(make_sample(0.0, s, torque_at(0.0, s), 0.0, params));
  const long steps = step_count(horizon, dt);
  const double h = horizon / static_cast<double>(steps);
  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    StepOutcome next;
    try {
      next = rk4(s, t, h, params, deriv);
    } catch (const InfeasibleConfiguration& e) {
      throw InfeasibleConfiguration(fmt::format("at t = {}: {}", t, e.what()));
    }
    s = next.state;
    const double t_next = k + 1 == steps ? horizon : static_cast<double>(k + 1) * h;
    log.samples.push_back(make_sample(t_next, s, torque_at(t_next, s), next.n_drift, params));
  }
  return log;
}

double motor_power(const FullState& s, const Vec3& Q) { return Q.dot(s.omega - s.Omega); }

void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log,
                          std::span<const std::string> preamble) {
  for (const auto& line : preamble) os << "# " << line << '\n';
  os << kTrajectoryColumns << '\n';
  for (const LogSample& r : log.samples) {
    const FullState& s = r.state;
    fmt::print(os,
               "{},{},{},{},{},{},{},{},{},{},"
               "{},{},{},{},{},{},{},{},{:.6g},{:.6g}\n",
               r.t, s.r_s.x(), s.r_s.y(), s.V.x(), s.V.y(), s.n.x(), s.n.y(), s.n.z(),
               s.omega.x(), s.omega.y(), s.omega.z(), s.Omega.x(), s.Omega.y(), s.Omega.z(),
               r.Q.x(), r.Q.y(), r.Q.z(), r.energy, r.n_drift, r.noslip_residual);
  }
}

}  // namespace spherebot
