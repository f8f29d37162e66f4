#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "spherebot/fixedaccel.hpp"
#include "spherebot/integrator.hpp"
#include "spherebot/solver.hpp"

using namespace spherebot;
using std::numbers::pi;

namespace {

FullState planar_full_state(const PlanarPendulumState& s, double V, const SystemParams& p) {
  return make_state(shell_rate_for_velocity({V, 0.0, 0.0}, 0.0, p),
                    {std::sin(s.theta), 0.0, std::cos(s.theta)}, {0.0, s.theta_dot, 0.0},
                    Vec3::Zero(), p);
}

}  // namespace

TEST(ReducedFlow, TrivialEquilibria) {
  const SystemParams p = default_params();
  EXPECT_EQ(theta_ddot({0.0, 0.0}, 0.0, p), 0.0);
  EXPECT_NEAR(theta_ddot({pi, 0.0}, 0.0, p), 0.0, 1e-15);
  EXPECT_EQ(fixed_accel_torque({0.0, 0.0}, 0.0, p), Vec3::Zero());
}

// The full model under the reduced torque law accelerates at a0 and swings
// the pendulum at the reduced rate.
TEST(ReducedFlow, MatchesFullModel) {
  const SystemParams p = default_params();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const PlanarPendulumState s{3.0 * u(rng), 2.0 * u(rng)};
    const double a0 = 0.3 * u(rng);
    const FullState full = planar_full_state(s, u(rng), p);
    const Vec3 Q = fixed_accel_torque(s, a0, p);
    EXPECT_EQ(Q.x(), 0.0);
    EXPECT_EQ(Q.z(), 0.0);
    const StateRates d = forward_dynamics(full, Q, p);
    EXPECT_LT((rolling_velocity(d.Omega_dot, p) - Vec3(a0, 0.0, 0.0)).norm(), 1e-12);
    EXPECT_NEAR(d.omega_dot.y(), theta_ddot(s, a0, p), 1e-12);
  }
}

TEST(IntegralC, GravityOnlyValue) {
  const SystemParams p = default_params();
  const double c = p.coupling();
  for (double theta : {-2.0, 0.0, 0.7, 3.0}) {
    EXPECT_NEAR(integral_C({theta, 0.0}, 0.0, p),
                c * (p.i0() - 0.5 * c * std::cos(theta)) * std::cos(theta), 1e-15);
  }
}

TEST(IntegralC, ConstantAlongFlowIdentity) {
  const SystemParams p = default_params();
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const PlanarPendulumState s{pi * u(rng), 2.0 * u(rng)};
    const double a0 = 0.5 * u(rng);
    const double dC_dtheta = (integral_C({s.theta + h, s.theta_dot}, a0, p) -
                              integral_C({s.theta - h, s.theta_dot}, a0, p)) / (2.0 * h);
    const double dC_dthetadot = (integral_C({s.theta, s.theta_dot + h}, a0, p) -
                                 integral_C({s.theta, s.theta_dot - h}, a0, p)) / (2.0 * h);
    worst = std::max(worst, std::abs(dC_dtheta * s.theta_dot + dC_dthetadot * theta_ddot(s, a0, p)));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(IntegralC, RateAlongTrajectory) {
  const SystemParams p = default_params();
  const double a0 = 0.1;
  const double dt = 1e-3;
  const auto path = integrate_reduced({0.3, 1.0}, a0, 10.0, dt, p);
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double rate = (integral_C(path[k].state, a0, p) - integral_C(path[k - 1].state, a0, p)) / dt;
    ASSERT_LT(std::abs(rate), 1e-8) << "t = " << path[k].t;
  }
}

// Bounded orbits only: beyond the separatrix the pendulum spins up without
// limit and no fixed step resolves it for long.
TEST(IntegralC, LongRunDrift) {
  const SystemParams p = default_params();
  const std::vector<std::pair<double, PlanarPendulumState>> runs{
      {0.05, {0.0, 0.0}}, {0.1, {0.0, 0.0}}, {0.1, {0.8, -0.4}}, {0.0, {1.0, 1.0}}};
  for (const auto& [a0, start] : runs) {
    const auto path = integrate_reduced(start, a0, 50.0, 1e-3, p);
    ASSERT_EQ(path.size(), 50001u);
    const double c0 = integral_C(path.front().state, a0, p);
    for (const auto& r : path) EXPECT_LT(std::abs(integral_C(r.state, a0, p) - c0), 1e-6 * std::abs(c0));
  }
}

TEST(Torque, ConstantAtCenter) {
  const SystemParams p = default_params();
  const auto eq = find_equilibria(0.1, p);
  ASSERT_FALSE(eq.empty());
  const Vec3 Q = fixed_accel_torque({eq[0].theta_star, 0.0}, 0.1, p);
  EXPECT_NEAR(Q.y(), 0.1 / p.R_o * p.I0(), 1e-12);
}

TEST(Equilibria, UnforcedPendulum) {
  const auto eq = find_equilibria(0.0, default_params());
  ASSERT_EQ(eq.size(), 2u);
  EXPECT_NEAR(eq[0].theta_star, 0.0, 1e-12);
  EXPECT_EQ(eq[0].kind, EquilibriumKind::Center);
  EXPECT_EQ(eq[1].theta_star, pi);
  EXPECT_EQ(eq[1].kind, EquilibriumKind::Saddle);
}

TEST(Equilibria, PublishedPhasePortraitAngles) {
  // Center at 0.38 and saddle at 2.56 for a0 = 0.1, stated to two decimals.
  const auto eq = find_equilibria(0.1, default_params());
  ASSERT_EQ(eq.size(), 2u);
  EXPECT_NEAR(eq[0].theta_star, 0.38, 0.005);
  EXPECT_NEAR(eq[1].theta_star, 2.56, 0.005);
}

TEST(Equilibria, ResidualAndClassification) {
  const SystemParams p = default_params();
  for (double a0 : {0.0, 0.02, 0.1, 0.15, -0.1}) {
    for (const Equilibrium& e : find_equilibria(a0, p)) {
      EXPECT_LT(e.residual, 1e-10);
      EXPECT_LT(std::abs(equilibrium_function(e.theta_star, a0, p)), 1e-10);
      const double h = 1e-6;
      const double slope = (equilibrium_function(e.theta_star + h, a0, p) -
                            equilibrium_function(e.theta_star - h, a0, p)) / (2.0 * h);
      // theta'' has the sign of the equilibrium function (positive denominator).
      EXPECT_EQ(e.kind, slope < 0.0 ? EquilibriumKind::Center : EquilibriumKind::Saddle);

      // C has an extremum at a center and a saddle point at a saddle.
      const double hc = 1e-4;
      const PlanarPendulumState z{e.theta_star, 0.0};
      auto C = [&](double dth, double dw) {
        return integral_C({z.theta + dth, z.theta_dot + dw}, a0, p);
      };
      const double c_tt = (C(hc, 0) - 2.0 * C(0, 0) + C(-hc, 0)) / (hc * hc);
      const double c_ww = (C(0, hc) - 2.0 * C(0, 0) + C(0, -hc)) / (hc * hc);
      const double c_tw = (C(hc, hc) - C(hc, -hc) - C(-hc, hc) + C(-hc, -hc)) / (4.0 * hc * hc);
      const double det = c_tt * c_ww - c_tw * c_tw;
      EXPECT_EQ(det > 0.0, e.kind == EquilibriumKind::Center) << a0 << " " << e.theta_star;
    }
  }
}

TEST(Equilibria, StiffnessMatchesFiniteDifference) {
  const SystemParams p = default_params();
  for (double theta : {-2.5, -0.4, 0.383, 1.9, 2.56}) {
    const double h = 1e-6;
    const double fd = (theta_ddot({theta + h, 0.0}, 0.1, p) - theta_ddot({theta - h, 0.0}, 0.1, p)) /
                      (2.0 * h);
    EXPECT_NEAR(stiffness(theta, 0.1, p), fd, 1e-6 * std::abs(fd));
  }
}

TEST(Equilibria, NegativeAccelerationMirrors) {
  const SystemParams p = default_params();
  const auto plus = find_equilibria(0.1, p);
  const auto minus = find_equilibria(-0.1, p);
  ASSERT_EQ(plus.size(), minus.size());
  for (const auto& e : plus) {
    const auto it = std::find_if(minus.begin(), minus.end(), [&](const Equilibrium& m) {
      return std::abs(m.theta_star + e.theta_star) < 1e-12;
    });
    ASSERT_NE(it, minus.end());
    EXPECT_EQ(it->kind, e.kind);
  }
}

TEST(Equilibria, NoneWhenAccelerationTooLarge) {
  // a0 I0 - a0 c cos - c sin > 0 everywhere once a0 is large enough.
  EXPECT_TRUE(find_equilibria(1.0, default_params()).empty());
}

TEST(Phase, RestOrbitIsClosed) {
  const SystemParams p = default_params();
  const PhasePortrait portrait = phase_portrait(0.1, p);
  ASSERT_GT(portrait.rest_period, 0.0);
  EXPECT_NEAR(portrait.rest_level, integral_C({0.0, 0.0}, 0.1, p), 1e-15);
  const auto& last = portrait.rest_orbit.back();
  EXPECT_NEAR(last.t, portrait.rest_period, 1e-9);
  EXPECT_NEAR(last.state.theta, 0.0, 1e-6);
  EXPECT_NEAR(last.state.theta_dot, 0.0, 1e-6);

  const auto crossings = section_crossings({0.0, 0.0}, 0.1, portrait.equilibria[0].theta_star, 4,
                                           50.0, 1e-3, p);
  ASSERT_EQ(crossings.size(), 4u);
  for (std::size_t k = 1; k < crossings.size(); ++k) {
    EXPECT_NEAR(crossings[k].state.theta_dot, crossings[0].state.theta_dot, 1e-6);
    EXPECT_NEAR(crossings[k].t - crossings[k - 1].t, portrait.rest_period, 1e-6);
  }
}

TEST(Phase, TorquePeriodicAlongRestOrbit) {
  const SystemParams p = default_params();
  const PhasePortrait portrait = phase_portrait(0.1, p);
  const auto path = integrate_reduced({0.0, 0.0}, 0.1, 2.0 * portrait.rest_period, 1e-4, p);
  const double q_start = fixed_accel_torque(path.front().state, 0.1, p).y();
  const PlanarPendulumState after = integrate_reduced({0.0, 0.0}, 0.1, portrait.rest_period, 1e-4, p)
                                        .back()
                                        .state;
  EXPECT_NEAR(fixed_accel_torque(after, 0.1, p).y(), q_start, 1e-6);
}

TEST(Phase, GridSymmetricAndSeparatrixLevel) {
  const SystemParams p = default_params();
  const PhasePortrait portrait = phase_portrait(0.1, p);
  const std::size_t nt = portrait.thetas.size();
  const std::size_t nw = portrait.theta_dots.size();
  ASSERT_EQ(portrait.C.size(), nt * nw);
  for (std::size_t iw = 0; iw < nw; ++iw) {
    EXPECT_NEAR(portrait.theta_dots[iw], -portrait.theta_dots[nw - 1 - iw], 1e-15);
    for (std::size_t it = 0; it < nt; it += 10) {
      EXPECT_NEAR(portrait.C[iw * nt + it], portrait.C[(nw - 1 - iw) * nt + it], 1e-15);
    }
  }
  ASSERT_EQ(portrait.separatrix_levels.size(), 1u);
  EXPECT_EQ(portrait.separatrix_levels[0],
            integral_C({portrait.equilibria[1].theta_star, 0.0}, 0.1, p));
  EXPECT_EQ(portrait.levels.size(), 20u);
}

// The constant-acceleration path tracked by the full model swings the
// pendulum exactly as the reduced flow does.
TEST(Phase, FullModelTracksReducedFlow) {
  const SystemParams p = default_params();
  const double a0 = 0.1;
  const PhasePortrait portrait = phase_portrait(a0, p);
  const double horizon = portrait.rest_period;
  const TrajectoryLog log =
      track_prescribed(uniform_acceleration_path(a0), horizon, 1e-3, p, rolling_state(Vec3::Zero(), p));
  const auto reduced = integrate_reduced({0.0, 0.0}, a0, horizon, 1e-3, p);
  ASSERT_EQ(log.samples.size(), reduced.size());
  for (std::size_t k = 0; k < reduced.size(); ++k) {
    const FullState& s = log.samples[k].state;
    EXPECT_NEAR(std::atan2(s.n.x(), s.n.z()), reduced[k].state.theta, 1e-6);
    EXPECT_NEAR(s.omega.y(), reduced[k].state.theta_dot, 1e-6);
    EXPECT_NEAR(log.samples[k].Q.y(), fixed_accel_torque(reduced[k].state, a0, p).y(), 1e-6);
  }
}

TEST(Phase, OutputFormats) {
  const SystemParams p = default_params();
  GridSpec grid;
  grid.theta_points = 5;
  grid.theta_dot_points = 3;
  const PhasePortrait portrait = phase_portrait(0.1, p, grid);
  std::ostringstream csv;
  write_phase_csv(csv, portrait);
  const std::string text = csv.str();
  EXPECT_EQ(text.substr(0, 18), "theta,theta_dot,C\n");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 16);

  std::ostringstream rest;
  write_rest_orbit_csv(rest, portrait, p);
  EXPECT_EQ(rest.str().substr(0, 20), "t,theta,theta_dot,C\n");

  std::ostringstream js;
  const std::vector<std::string> prov{"spherebot test"};
  write_equilibria_json(js, portrait, prov);
  const auto doc = nlohmann::json::parse(js.str());
  EXPECT_EQ(doc["provenance"][0], "spherebot test");
  ASSERT_EQ(doc["equilibria"].size(), 2u);
  EXPECT_EQ(doc["equilibria"][0]["kind"], "center");
  EXPECT_EQ(doc["equilibria"][1]["kind"], "saddle");
  EXPECT_DOUBLE_EQ(doc["equilibria"][1]["theta_star"].get<double>(), portrait.equilibria[1].theta_star);
  EXPECT_EQ(doc["equilibria"][0]["eigenvalues"].size(), 2u);
}
