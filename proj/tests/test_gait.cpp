#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "spherebot/gait.hpp"
#include "spherebot/solver.hpp"

using namespace spherebot;
using std::numbers::pi;

TEST(ThetaProfile, Boundaries) {
  for (double t : {0.0, 5.0}) {
    const ThetaProfile g = theta_profile(t, 0.83, 5.0);
    EXPECT_NEAR(g.theta, 0.0, 1e-15);
    EXPECT_NEAR(g.theta_dot, 0.0, 1e-15);
    EXPECT_NEAR(g.theta_ddot, 2.0 * 0.83 * pi * pi / 25.0, 1e-15);
  }
}

TEST(ThetaProfile, MidpointAndQuarter) {
  const ThetaProfile mid = theta_profile(2.5, 0.83, 5.0);
  EXPECT_NEAR(mid.theta, 0.83, 1e-15);
  EXPECT_NEAR(mid.theta_dot, 0.0, 1e-15);
  EXPECT_NEAR(mid.theta_ddot, -2.0 * 0.83 * pi * pi / 25.0, 1e-15);
  EXPECT_NEAR(theta_profile(1.25, 0.83, 5.0).theta, 0.415, 1e-15);
}

TEST(ThetaProfile, DerivativesMatchFiniteDifferences) {
  const double h = 1e-5;
  for (double t : {0.4, 1.9, 3.3}) {
    const ThetaProfile g = theta_profile(t, 1.3, 4.0);
    const ThetaProfile lo = theta_profile(t - h, 1.3, 4.0);
    const ThetaProfile hi = theta_profile(t + h, 1.3, 4.0);
    EXPECT_NEAR(g.theta_dot, (hi.theta - lo.theta) / (2.0 * h), 1e-8);
    EXPECT_NEAR(g.theta_ddot, (hi.theta_dot - lo.theta_dot) / (2.0 * h), 1e-8);
  }
}

TEST(ThetaProfile, OutsideGaitThrows) {
  EXPECT_THROW(theta_profile(-0.1, 0.5, 2.0), std::out_of_range);
  EXPECT_THROW(theta_profile(2.1, 0.5, 2.0), std::out_of_range);
}

TEST(GaitSpec, Validation) {
  EXPECT_THROW((GaitSpec{0.5, 0.0}).validate(), std::invalid_argument);
  EXPECT_THROW((GaitSpec{3.2, 1.0}).validate(), std::invalid_argument);
  EXPECT_NO_THROW((GaitSpec{-3.1, 1.0}).validate());
  EXPECT_EQ((GaitSpec{0.7, 1.0, 0.0, GaitKind::Brake}).signed_amplitude(), -0.7);
}

TEST(Acceleration, ZeroAmplitudeGivesNothing) {
  const SystemParams p = default_params();
  for (double t : {0.0, 1.0, 2.5, 5.0}) EXPECT_EQ(gait_acceleration(t, 0.0, 5.0, p), 0.0);
  EXPECT_EQ(delta_v(0.0, 5.0, p), 0.0);
}

// The full solver, fed the planned pendulum state and the planned
// acceleration, must reproduce the planned angular acceleration.
TEST(Acceleration, ConsistentWithInverseDynamics) {
  const SystemParams p = default_params();
  const double alpha = 1.1;
  const double T = 3.0;
  for (double t : {0.0, 0.3, 0.9, 1.5, 2.2, 3.0}) {
    const ThetaProfile g = theta_profile(t, alpha, T);
    const double a = gait_acceleration(t, alpha, T, p);
    const FullState s = make_state(shell_rate_for_velocity({0.2, 0.0, 0.0}, 0.0, p),
                                   {std::sin(g.theta), 0.0, std::cos(g.theta)},
                                   {0.0, g.theta_dot, 0.0}, Vec3::Zero(), p);
    const InverseDynamics inv = inverse_dynamics(s, {a, 0.0, 0.0}, p);
    EXPECT_NEAR(inv.omega_dot.y(), g.theta_ddot, 1e-9);
    EXPECT_NEAR(inv.Q.y(), planar_torque(g, a, p), 1e-10);
  }
}

TEST(DeltaV, MatchesAdaptiveQuadrature) {
  const SystemParams p = default_params();
  for (double alpha : {-2.1, 0.4, 0.83, 2.7}) {
    for (double T : {0.7, 5.0, 9.0}) {
      const double oracle = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          [&](double t) { return gait_acceleration(t, alpha, T, p); }, 0.0, T, 15, 1e-14);
      EXPECT_NEAR(delta_v(alpha, T, p), oracle, 1e-9) << alpha << " " << T;
    }
  }
}

TEST(DeltaV, Antisymmetric) {
  const SystemParams p = default_params();
  for (double alpha : {0.2, 1.0, 2.9}) {
    for (double T : {0.5, 3.0, 10.0}) {
      EXPECT_NEAR(delta_v(alpha, T, p) + delta_v(-alpha, T, p), 0.0, 1e-10);
      EXPECT_NEAR(rotation_angle(alpha, T, 0.4, p) + rotation_angle(-alpha, T, 0.4, p), 0.0, 1e-10);
    }
  }
}

TEST(SolveAlpha, ZeroTarget) {
  EXPECT_EQ(solve_alpha(0.0, 5.0, default_params()), 0.0);
}

TEST(SolveAlpha, ReproducesPublishedExampleAmplitude) {
  // alpha = 0.83 for a speed gain of 0.5 in T = 5, stated to two decimals.
  const double alpha = solve_alpha(0.5, 5.0, default_params());
  EXPECT_NEAR(alpha, 0.83, 0.005);
  EXPECT_NEAR(solve_alpha(-0.5, 5.0, default_params()), -alpha, 1e-15);
}

TEST(SolveAlpha, RoundTrip) {
  const SystemParams p = default_params();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> frac(-0.99, 0.99);
  std::uniform_real_distribution<double> Td(0.5, 10.0);
  for (int k = 0; k < 20; ++k) {
    const double T = Td(rng);
    const double target = frac(rng) * max_response(SurfaceKind::DeltaV, T, p).value;
    const double alpha = solve_alpha(target, T, p);
    EXPECT_NEAR(delta_v(alpha, T, p), target, 1e-7);
    EXPECT_LT(std::abs(alpha), pi);
  }
}

TEST(SolveAlpha, PicksSmallestRoot) {
  const SystemParams p = default_params();
  const double T = 5.0;
  const ResponsePeak peak = max_response(SurfaceKind::DeltaV, T, p);
  // Above dV(pi-) the response crosses a target twice before pi.
  const double target = 0.95 * peak.value;
  const auto roots = alpha_roots(target, T, p);
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_LT(roots[0], peak.alpha);
  EXPECT_GT(roots[1], peak.alpha);
  EXPECT_DOUBLE_EQ(solve_alpha(target, T, p), roots[0]);
  for (double r : roots) EXPECT_NEAR(delta_v(r, T, p), target, 1e-9);
}

TEST(SolveAlpha, UnreachableReportsMaximum) {
  const SystemParams p = default_params();
  const double peak = max_response(SurfaceKind::DeltaV, 5.0, p).value;
  try {
    solve_alpha(2.0, 5.0, p);
    FAIL() << "expected UnreachableTarget";
  } catch (const UnreachableTarget& e) {
    EXPECT_DOUBLE_EQ(e.achievable_max(), peak);
  }
}

TEST(MaxResponse, IsTheLargestSample) {
  const SystemParams p = default_params();
  const ResponsePeak peak = max_response(SurfaceKind::DeltaV, 5.0, p);
  for (double a : linspace(0.01, 3.13, 300)) EXPECT_LE(delta_v(a, 5.0, p), peak.value + 1e-12);
}

// The envelope max_alpha dV(alpha, T) falls with T on the short-period
// branch; for longer gaits it rises again.
TEST(MaxResponse, EnvelopeFallsForShortGaits) {
  const SystemParams p = default_params();
  double previous = std::numeric_limits<double>::infinity();
  for (double T : linspace(0.5, 3.0, 11)) {
    const double v = max_response(SurfaceKind::DeltaV, T, p).value;
    EXPECT_LT(v, previous) << "T = " << T;
    previous = v;
  }
  EXPECT_GT(max_response(SurfaceKind::DeltaV, 8.0, p).value,
            max_response(SurfaceKind::DeltaV, 4.0, p).value);
}

TEST(RotationAngle, PublishedTurnExample) {
  const SystemParams p = default_params();
  const double alpha = solve_alpha(0.5, 5.0, p);
  EXPECT_NEAR(rotation_angle(alpha, 5.0, 0.6, p), std::atan(5.0 / 6.0), 1e-9);
  EXPECT_NEAR(std::atan(5.0 / 6.0) * 180.0 / pi, 40.0, 0.25);
  EXPECT_EQ(rotation_angle(0.0, 5.0, 0.6, p), 0.0);
  EXPECT_THROW(rotation_angle(0.5, 5.0, 0.0, p), std::invalid_argument);
}

TEST(RotationAngle, ApproachesRightAngleAsSpeedVanishes) {
  const SystemParams p = default_params();
  EXPECT_NEAR(rotation_angle(0.8, 5.0, 1e-9, p), pi / 2.0, 1e-8);
}

TEST(Surface, GridAndThreadIndependence) {
  const SystemParams p = default_params();
  const auto alphas = linspace(-2.0, 2.0, 9);
  const auto periods = linspace(1.0, 4.0, 4);
  const ResponseSurface one = sample_surface(SurfaceKind::Psi, alphas, periods, p, 0.5, 1);
  const ResponseSurface many = sample_surface(SurfaceKind::Psi, alphas, periods, p, 0.5, 3);
  EXPECT_EQ(one.values, many.values);
  ASSERT_EQ(one.values.size(), 36u);
  for (std::size_t iT = 0; iT < periods.size(); ++iT) {
    for (std::size_t ia = 0; ia < alphas.size(); ++ia) {
      EXPECT_NEAR(one.at(ia, iT) + one.at(alphas.size() - 1 - ia, iT), 0.0, 1e-10);
      EXPECT_DOUBLE_EQ(one.at(ia, iT), rotation_angle(alphas[ia], periods[iT], 0.5, p));
    }
  }
  std::ostringstream os;
  write_surface_csv(os, one);
  EXPECT_EQ(os.str().substr(0, 14), "alpha,T,value\n");
}

TEST(Linspace, Endpoints) {
  const auto v = linspace(-3.0, 3.0, 241);
  ASSERT_EQ(v.size(), 241u);
  EXPECT_EQ(v.front(), -3.0);
  EXPECT_EQ(v.back(), 3.0);
  EXPECT_NEAR(v[120], 0.0, 1e-15);
}

TEST(TorqueSchedule, AlongMotionDirection) {
  const SystemParams p = default_params();
  const TorqueSchedule s = gait_torque_schedule({0.83, 5.0, 0.0}, p, 0.01);
  ASSERT_EQ(s.t.size(), 501u);
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    EXPECT_EQ(s.Q[k].z(), 0.0);
    EXPECT_NEAR(s.Q[k].x(), 0.0, 1e-18);
    const ThetaProfile g = theta_profile(s.t[k], 0.83, 5.0);
    EXPECT_NEAR(s.Q[k].y(), planar_torque(g, planar_acceleration(g, p), p), 1e-15);
  }
  EXPECT_NEAR(s.plan.back().V.x(), delta_v(0.83, 5.0, p), 1e-9);
}

TEST(TorqueSchedule, PerpendicularSwing) {
  const SystemParams p = default_params();
  const TorqueSchedule s = gait_torque_schedule({0.6, 2.0, pi / 2.0, GaitKind::Turn}, p, 0.01);
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    const ThetaProfile g = theta_profile(s.t[k], 0.6, 2.0);
    EXPECT_NEAR(s.Q[k].x(), -planar_torque(g, planar_acceleration(g, p), p), 1e-15);
    EXPECT_NEAR(s.Q[k].y(), 0.0, 1e-16);
    EXPECT_EQ(s.Q[k].z(), 0.0);
  }
}

TEST(TorqueSchedule, ZeroAmplitudeAndStepChecks) {
  const SystemParams p = default_params();
  const TorqueSchedule s = gait_torque_schedule({0.0, 2.0, 0.3}, p, 0.1);
  for (const Vec3& Q : s.Q) EXPECT_EQ(Q.norm(), 0.0);
  EXPECT_THROW(gait_torque_schedule({0.5, 2.0}, p, 0.3), std::invalid_argument);
  const TorqueSchedule shifted = gait_torque_schedule({0.5, 2.0}, p, 0.5, 3.0);
  EXPECT_EQ(shifted.start(), 3.0);
  EXPECT_EQ(shifted.end(), 5.0);
  EXPECT_LT((shifted.segments.front().law(4.0) - shifted.Q[2]).norm(), 1e-15);
}

TEST(Compose, AccelerateThenBrakeStops) {
  const SystemParams p = default_params();
  const double alpha = solve_alpha(0.5, 5.0, p);
  const std::vector<GaitSpec> gaits{{alpha, 5.0, 0.0, GaitKind::Accelerate},
                                    {alpha, 5.0, 0.0, GaitKind::Brake}};
  const TorqueSchedule s = compose(gaits, p, 0.01);
  EXPECT_EQ(s.end(), 10.0);
  EXPECT_EQ(s.segments.size(), 2u);
  EXPECT_NEAR(s.plan[500].V.x(), 0.5, 1e-7);
  EXPECT_LT(s.plan.back().V.norm(), 1e-12);
  EXPECT_LT((s.plan.back().n - vertical()).norm(), 1e-15);
  EXPECT_TRUE(s.warnings.empty());
  // The junction appears twice: end of the first gait, start of the second.
  EXPECT_EQ(s.t[500], s.t[501]);
}

TEST(Compose, OverlargeBrakeWarns) {
  const SystemParams p = default_params();
  const std::vector<GaitSpec> gaits{{0.5, 2.0, 0.0, GaitKind::Accelerate},
                                    {1.0, 2.0, 0.0, GaitKind::Brake}};
  EXPECT_EQ(compose(gaits, p, 0.01).warnings.size(), 1u);
}

TEST(Compose, ZeroGaitsAreIdentity) {
  const SystemParams p = default_params();
  const std::vector<GaitSpec> gaits{{0.0, 1.0}, {0.0, 2.0, 1.0, GaitKind::Turn}};
  const TorqueSchedule s = compose(gaits, p, 0.1, {0.3, 0.0, 0.0});
  for (const Vec3& Q : s.Q) EXPECT_EQ(Q.norm(), 0.0);
  EXPECT_LT((s.plan.back().V - Vec3(0.3, 0.0, 0.0)).norm(), 1e-15);
}

TEST(Compose, TurnMeasuredFromCurrentHeading) {
  const SystemParams p = default_params();
  const std::vector<Maneuver> script{{GaitKind::Accelerate, 0.5, 5.0},
                                     {GaitKind::Turn, 40.0 * pi / 180.0, 5.0},
                                     {GaitKind::Turn, 30.0 * pi / 180.0, 5.0}};
  const auto gaits = plan_maneuvers(script, p);
  ASSERT_EQ(gaits.size(), 3u);
  EXPECT_NEAR(gaits[0].alpha, solve_alpha(0.5, 5.0, p), 1e-15);
  const TorqueSchedule s = compose(gaits, p, 0.01);
  const Vec3 V = s.plan.back().V;
  EXPECT_NEAR(std::atan2(V.y(), V.x()), 70.0 * pi / 180.0, 1e-7);
  EXPECT_THROW(plan_maneuvers(std::vector<Maneuver>{{GaitKind::Turn, 0.3, 5.0}}, p),
               std::invalid_argument);
}
