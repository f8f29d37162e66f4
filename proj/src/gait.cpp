#include "spherebot/gait.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace spherebot {
namespace {

using std::numbers::pi;

constexpr int kRootScanPanels = 256;
constexpr int kBisectionIterations = 200;

// Unit swing direction and torque direction for a swing plane at angle phi.
Vec3 swing_direction(double phi) { return {std::cos(phi), std::sin(phi), 0.0}; }
Vec3 torque_direction(double phi) { return {-std::sin(phi), std::cos(phi), 0.0}; }

double heading_of(const Vec3& V, double fallback) {
  const double speed = std::hypot(V.x(), V.y());
  return speed > 1e-12 ? std::atan2(V.y(), V.x()) : fallback;
}

long steps_for(double T, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double ratio = T / dt;
  const long steps = std::lround(ratio);
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio) {
    throw std::invalid_argument(fmt::format("dt = {} does not divide T = {}", dt, T));
  }
  return steps;
}

}  // namespace

const char* to_string(GaitKind kind) {
  switch (kind) {
    case GaitKind::Accelerate: return "accelerate";
    case GaitKind::Brake: return "brake";
    case GaitKind::Turn: return "turn";
  }
  return "?";
}

const char* to_string(SurfaceKind kind) {
  return kind == SurfaceKind::DeltaV ? "dv" : "psi";
}

void GaitSpec::validate() const {
  if (!(T > 0.0)) throw std::invalid_argument(fmt::format("gait duration must be positive, got {}", T));
  if (!(std::abs(alpha) < pi)) {
    throw std::invalid_argument(
        fmt::format("gait amplitude must satisfy |alpha| < pi, got {}", alpha));
  }
}

ThetaProfile theta_profile(double t, double alpha, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("gait duration must be positive");
  const double slack = 1e-12 * T;
  if (t < -slack || t > T + slack) {
    throw std::out_of_range(fmt::format("t = {} outside gait interval [0, {}]", t, T));
  }
  t = std::clamp(t, 0.0, T);
  const double w = pi / T;
  const double s = std::sin(w * t);
  return {alpha * s * s, alpha * w * std::sin(2.0 * w * t),
          alpha * 2.0 * w * w * std::cos(2.0 * w * t)};
}

double planar_acceleration(const ThetaProfile& g, const SystemParams& p) {
  const double c = std::cos(g.theta);
  const double s = std::sin(g.theta);
  const double rr = p.coupling();
  const double denom = p.I0() - rr * c;
  if (!(denom > 0.0)) {
    throw std::invalid_argument("I0 - R_o R_t cos(theta) vanishes; parameter set rejected");
  }
  return p.R_o *
         (g.theta_ddot * (p.i0() - rr * c) + rr * g.theta_dot * g.theta_dot * s + p.R_t * s) /
         denom;
}

double planar_torque(const ThetaProfile& g, double a, const SystemParams& p) {
  return a / p.R_o * p.I0() +
         p.coupling() * (std::cos(g.theta) * g.theta_ddot -
                         std::sin(g.theta) * g.theta_dot * g.theta_dot);
}

double gait_acceleration(double t, double alpha, double T, const SystemParams& p) {
  return planar_acceleration(theta_profile(t, alpha, T), p);
}

double delta_v(double alpha, double T, const SystemParams& p) {
  const int n = kQuadraturePanels;
  const double h = T / n;
  double odd = 0.0;
  double even = 0.0;
  for (int k = 1; k < n; ++k) {
    const double f = gait_acceleration(k * h, alpha, T, p);
    (k % 2 ? odd : even) += f;
  }
  const double ends = gait_acceleration(0.0, alpha, T, p) + gait_acceleration(T, alpha, T, p);
  return h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
}

double rotation_angle(double alpha, double T, double V_s, const SystemParams& p) {
  if (!(V_s > 0.0)) {
    throw std::invalid_argument(fmt::format("initial speed V_s must be positive, got {}", V_s));
  }
  return std::atan(delta_v(alpha, T, p) / V_s);
}

double surface_value(SurfaceKind kind, double alpha, double T, const SystemParams& p, double V_s) {
  return kind == SurfaceKind::DeltaV ? delta_v(alpha, T, p) : rotation_angle(alpha, T, V_s, p);
}

ResponsePeak max_response(SurfaceKind kind, double T, const SystemParams& p, double V_s) {
  const double h = pi / kRootScanPanels;
  ResponsePeak best;
  int best_k = 0;
  for (int k = 1; k < kRootScanPanels; ++k) {
    const double v = surface_value(kind, k * h, T, p, V_s);
    if (k == 1 || v > best.value) {
      best = {k * h, v};
      best_k = k;
    }
  }
  // Golden-section refinement on the neighbouring panels.
  double lo = (best_k - 1) * h;
  double hi = std::min((best_k + 1) * h, pi * (1.0 - 1e-12));
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = surface_value(kind, x1, T, p, V_s);
  double f2 = surface_value(kind, x2, T, p, V_s);
  while (hi - lo > 1e-10) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = surface_value(kind, x1, T, p, V_s);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = surface_value(kind, x2, T, p, V_s);
    }
  }
  const double mid = 0.5 * (lo + hi);
  const double v = surface_value(kind, mid, T, p, V_s);
  if (v > best.value) best = {mid, v};
  return best;
}

std::vector<double> alpha_roots(double target, double T, const SystemParams& p,
                                SurfaceKind kind, double V_s, double alpha_max) {
  auto g = [&](double a) { return surface_value(kind, a, T, p, V_s) - target; };
  // The open interval's right end is sampled just inside alpha_max.
  const double right = alpha_max * (1.0 - 1e-12);
  const double h = alpha_max / kRootScanPanels;
  std::vector<double> roots;
  double a_prev = 0.0;
  double g_prev = g(0.0);
  if (g_prev == 0.0) roots.push_back(0.0);
  for (int k = 1; k <= kRootScanPanels; ++k) {
    const double a = k == kRootScanPanels ? right : k * h;
    const double ga = g(a);
    if (ga == 0.0) {
      roots.push_back(a);
    } else if (g_prev != 0.0 && (ga > 0.0) != (g_prev > 0.0)) {
      double lo = a_prev;
      double hi = a;
      double g_lo = g_prev;
      for (int it = 0; it < kBisectionIterations && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((gm > 0.0) == (g_lo > 0.0)) {
          lo = mid;
          g_lo = gm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    a_prev = a;
    g_prev = ga;
  }
  // alpha = 0 is outside the open interval unless the target is zero.
  if (target != 0.0) std::erase(roots, 0.0);
  return roots;
}

double solve_alpha(double target, double T, const SystemParams& p, SurfaceKind kind, double V_s) {
  if (!(T > 0.0)) throw std::invalid_argument("gait duration must be positive");
  if (kind == SurfaceKind::Psi && !(V_s > 0.0)) {
    throw std::invalid_argument("turn planning needs a positive initial speed V_s");
  }
  if (target == 0.0) return 0.0;
  const double magnitude = std::abs(target);
  const auto roots = alpha_roots(magnitude, T, p, kind, V_s);
  if (roots.empty()) {
    const auto peak = max_response(kind, T, p, V_s);
    throw UnreachableTarget(
        fmt::format("{} target {} is unreachable for T = {}; achievable range is [-{:.9g}, {:.9g}]",
                    to_string(kind), target, T, peak.value, peak.value),
        peak.value);
  }
  return std::copysign(roots.front(), target);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = k + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return out;
}

ResponseSurface sample_surface(SurfaceKind kind, std::span<const double> alphas,
                               std::span<const double> periods, const SystemParams& p,
                               double V_s, unsigned threads) {
  ResponseSurface s;
  s.kind = kind;
  s.V_s = V_s;
  s.alphas.assign(alphas.begin(), alphas.end());
  s.periods.assign(periods.begin(), periods.end());
  s.values.assign(alphas.size() * periods.size(), 0.0);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<std::size_t>(1, periods.size()));

  auto work = [&](unsigned worker) {
    for (std::size_t iT = worker; iT < periods.size(); iT += threads) {
      for (std::size_t ia = 0; ia < alphas.size(); ++ia) {
        s.values[iT * alphas.size() + ia] = surface_value(kind, alphas[ia], periods[iT], p, V_s);
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  return s;
}

ResponseSurface default_surface(SurfaceKind kind, const SystemParams& p, double V_s) {
  const auto alphas = linspace(-3.0, 3.0, 241);
  const auto periods = linspace(0.5, 10.0, 96);
  return sample_surface(kind, alphas, periods, p, V_s);
}

void write_surface_csv(std::ostream& os, const ResponseSurface& s) {
  os << "alpha,T,value\n";
  for (std::size_t iT = 0; iT < s.periods.size(); ++iT) {
    for (std::size_t ia = 0; ia < s.alphas.size(); ++ia) {
      fmt::print(os, "{},{},{}\n", s.alphas[ia], s.periods[iT], s.at(ia, iT));
    }
  }
}

TorqueSchedule gait_torque_schedule(const GaitSpec& gait, const SystemParams& p, double dt,
                                    double t0, const Vec3& V0, double heading) {
  gait.validate();
  const long steps = steps_for(gait.T, dt);
  const double alpha = gait.signed_amplitude();
  const double T = gait.T;
  const double phi = heading + gait.phi;
  const Vec3 along = swing_direction(phi);
  const Vec3 normal = torque_direction(phi);
  const double h = T / static_cast<double>(steps);

  auto sample = [alpha, T, &p](double tau, double& a) {
    const ThetaProfile g = theta_profile(tau, alpha, T);
    a = planar_acceleration(g, p);
    return g;
  };

  TorqueSchedule s;
  s.t.reserve(steps + 1);
  double speed_gain = 0.0;
  double a_prev = 0.0;
  for (long k = 0; k <= steps; ++k) {
    const double tau = k == steps ? T : static_cast<double>(k) * h;
    double a = 0.0;
    const ThetaProfile g = sample(tau, a);
    if (k > 0) {
      double a_mid = 0.0;
      sample(tau - 0.5 * h, a_mid);
      speed_gain += h / 6.0 * (a_prev + 4.0 * a_mid + a);
    }
    a_prev = a;
    s.t.push_back(t0 + tau);
    s.Q.push_back(planar_torque(g, a, p) * normal);
    PlannedState planned;
    planned.n = Vec3(std::sin(g.theta) * along.x(), std::sin(g.theta) * along.y(),
                     std::cos(g.theta));
    planned.omega = g.theta_dot * normal;
    planned.V = V0 + speed_gain * along;
    s.plan.push_back(planned);
  }

  const SystemParams params = p;
  s.segments.push_back({t0, t0 + T, [alpha, T, t0, normal, params](double t) -> Vec3 {
                          const ThetaProfile g =
                              theta_profile(std::clamp(t - t0, 0.0, T), alpha, T);
                          return planar_torque(g, planar_acceleration(g, params), params) * normal;
                        }});
  return s;
}

TorqueSchedule compose(std::span<const GaitSpec> gaits, const SystemParams& p, double dt,
                       const Vec3& V0, double heading) {
  if (gaits.empty()) throw std::invalid_argument("compose needs at least one gait");
  TorqueSchedule out;
  Vec3 V = V0;
  double t = 0.0;
  for (std::size_t idx = 0; idx < gaits.size(); ++idx) {
    const GaitSpec& gait = gaits[idx];
    heading = heading_of(V, heading);
    const double speed = std::hypot(V.x(), V.y());
    TorqueSchedule piece = gait_torque_schedule(gait, p, dt, t, V, heading);
    const PlannedState& last = piece.plan.back();
    if ((last.n - vertical()).norm() > 1e-12 || last.omega.norm() > 1e-12) {
      throw std::logic_error(fmt::format("gait {} does not end with the pendulum at rest", idx));
    }
    if (gait.kind == GaitKind::Brake) {
      const double change = (last.V - V).norm();
      if (change > speed * (1.0 + 1e-9)) {
        piece.warnings.push_back(fmt::format(
            "gait {}: brake removes {:.6g} but current speed is {:.6g}; the ball reverses", idx,
            change, speed));
      }
    }
    V = last.V;
    t += gait.T;
    out.append(piece);
  }
  return out;
}

std::vector<GaitSpec> plan_maneuvers(std::span<const Maneuver> maneuvers, const SystemParams& p,
                                     const Vec3& V0, double heading) {
  std::vector<GaitSpec> gaits;
  Vec3 V = V0;
  for (const Maneuver& m : maneuvers) {
    heading = heading_of(V, heading);
    const double speed = std::hypot(V.x(), V.y());
    GaitSpec g;
    g.kind = m.kind;
    g.T = m.T;
    switch (m.kind) {
      case GaitKind::Accelerate:
        g.alpha = solve_alpha(m.target, m.T, p);
        break;
      case GaitKind::Brake:
        g.alpha = solve_alpha(m.target, m.T, p);
        break;
      case GaitKind::Turn:
        if (!(speed > 0.0)) {
          throw std::invalid_argument("a turn needs the ball to be moving");
        }
        g.alpha = solve_alpha(m.target, m.T, p, SurfaceKind::Psi, speed);
        g.phi = pi / 2.0;
        break;
    }
    const double dv = delta_v(g.signed_amplitude(), g.T, p);
    V += dv * swing_direction(heading + g.phi);
    gaits.push_back(g);
  }
  return gaits;
}

}  // namespace spherebot
