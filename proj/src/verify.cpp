#include "spherebot/verify.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include <fmt/format.h>

#include "spherebot/fixedaccel.hpp"
#include "spherebot/gait.hpp"
#include "spherebot/integrator.hpp"
#include "spherebot/solver.hpp"

namespace spherebot {
namespace {

using std::numbers::pi;

CheckResult check(std::string name, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    auto [ok, detail] = body();
    return {std::move(name), ok, std::move(detail)};
  } catch (const std::exception& e) {
    return {std::move(name), false, fmt::format("threw: {}", e.what())};
  }
}

FullState generic_state(const SystemParams& p) {
  const Vec3 n = Vec3(0.3, -0.2, 0.9).normalized();
  return make_state({0.2, -0.4, 0.1}, n, {0.5, 0.3, -0.7}, Vec3::Zero(), p);
}

FullState planar_state(double theta, double theta_dot, double V, const SystemParams& p) {
  return make_state(shell_rate_for_velocity({V, 0.0, 0.0}, 0.0, p),
                    {std::sin(theta), 0.0, std::cos(theta)}, {0.0, theta_dot, 0.0}, Vec3::Zero(),
                    p);
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(const SystemParams& p) {
  std::vector<CheckResult> out;

  out.push_back(check("units and feasibility", [&] {
    const double unit_err = std::abs(p.i + p.j - p.R_t);
    return std::pair{unit_err < 1e-12 && p.feasible(),
                     fmt::format("|i+j-R_t| = {:.2e}, i0 - R_oR_t = {:.6g}", unit_err,
                                 p.i0() - p.coupling())};
  }));

  out.push_back(check("inverse/forward round trip", [&] {
    const FullState s = generic_state(p);
    const Vec3 a(0.13, -0.07, 0.0);
    const InverseDynamics inv = inverse_dynamics(s, a, p);
    const StateRates fwd = forward_dynamics(s, inv.Q, p);
    const double err = (fwd.Omega_dot - prescribed_shell_rate(a, p)).norm() +
                       (fwd.omega_dot - inv.omega_dot).norm();
    return std::pair{err < 1e-8, fmt::format("rate mismatch {:.2e}", err)};
  }));

  out.push_back(check("planar solve vs closed-form torque", [&] {
    double worst = 0.0;
    for (double theta : {-2.0, -0.6, 0.0, 0.4, 1.7}) {
      for (double a : {-0.3, 0.0, 0.25}) {
        const FullState s = planar_state(theta, 0.8 - 0.3 * theta, 0.4, p);
        const InverseDynamics inv = inverse_dynamics(s, {a, 0.0, 0.0}, p);
        const ThetaProfile g{theta, s.omega.y(), inv.omega_dot.y()};
        worst = std::max(worst, std::abs(inv.Q.y() - planar_torque(g, a, p)));
        worst = std::max(worst, std::abs(inv.Q.x()) + std::abs(inv.Q.z()));
      }
    }
    return std::pair{worst < 1e-10, fmt::format("max deviation {:.2e}", worst)};
  }));

  out.push_back(check("delta-v antisymmetry", [&] {
    double worst = 0.0;
    for (double alpha : {0.3, 1.1, 2.4}) {
      for (double T : {1.0, 5.0}) {
        worst = std::max(worst, std::abs(delta_v(alpha, T, p) + delta_v(-alpha, T, p)));
      }
    }
    return std::pair{worst < 1e-10, fmt::format("max |dV(a) + dV(-a)| = {:.2e}", worst)};
  }));

  out.push_back(check("gait boundary state and velocity direction", [&] {
    const GaitSpec gait{0.6, 2.0, 0.7, GaitKind::Turn};
    const Vec3 V0(0.3, 0.0, 0.0);
    const TorqueSchedule sched = gait_torque_schedule(gait, p, 1e-3, 0.0, V0);
    const TrajectoryLog log = simulate(rolling_state(V0, p), sched, 1e-3, p);
    const FullState& end = log.back().state;
    const double n_err = (end.n - vertical()).norm();
    const double w_err = end.omega.norm();
    const Vec3 dV = end.V - V0;
    const Vec3 s(std::cos(gait.phi), std::sin(gait.phi), 0.0);
    const double ortho = (dV - dV.dot(s) * s).norm() / dV.norm();
    const double dv_err = std::abs(dV.dot(s) - delta_v(gait.alpha, gait.T, p));
    const bool ok = n_err < 1e-6 && w_err < 1e-6 && ortho < 1e-6 && dv_err < 1e-6;
    return std::pair{ok, fmt::format("|n-k| = {:.2e}, |w| = {:.2e}, orthogonal {:.2e}, dV error "
                                     "{:.2e}",
                                     n_err, w_err, ortho, dv_err)};
  }));

  out.push_back(check("energy conservation without torque", [&] {
    const TorqueSchedule sched = TorqueSchedule::constant(Vec3::Zero(), 0.0, 5.0, 5.0);
    const TrajectoryLog log = simulate(generic_state(p), sched, 1e-3, p);
    const double e0 = log.front().energy;
    double worst = 0.0;
    for (const auto& r : log.samples) worst = std::max(worst, std::abs(r.energy - e0));
    const double rel = worst / std::abs(e0);
    return std::pair{rel < 1e-8, fmt::format("relative drift {:.2e} over t = 5", rel)};
  }));

  out.push_back(check("integral C conservation", [&] {
    const double a0 = 0.1;
    const auto path = integrate_reduced({0.0, 0.0}, a0, 50.0, 1e-3, p);
    const double c0 = integral_C(path.front().state, a0, p);
    double worst = 0.0;
    for (const auto& r : path) worst = std::max(worst, std::abs(integral_C(r.state, a0, p) - c0));
    const double rel = worst / std::abs(c0);
    return std::pair{rel < 1e-6, fmt::format("relative drift {:.2e} over t = 50", rel)};
  }));

  out.push_back(check("fixed-acceleration equilibria", [&] {
    const auto eq = find_equilibria(0.1, p);
    std::string detail;
    bool ok = eq.size() == 2;
    for (const auto& e : eq) {
      ok = ok && e.residual < 1e-10;
      if (!detail.empty()) detail += ", ";
      detail += fmt::format("{} at {:.4f} (residual {:.1e})", to_string(e.kind), e.theta_star,
                            e.residual);
    }
    ok = ok && eq[0].kind == EquilibriumKind::Center && eq[1].kind == EquilibriumKind::Saddle &&
         eq[0].theta_star > 0.0 && eq[1].theta_star < pi;
    return std::pair{ok, detail.empty() ? std::string("no equilibria") : detail};
  }));

  return out;
}

}  // namespace spherebot
