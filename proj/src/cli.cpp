#include "spherebot/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "spherebot/fixedaccel.hpp"
#include "spherebot/gait.hpp"
#include "spherebot/integrator.hpp"
#include "spherebot/scenario.hpp"
#include "spherebot/verify.hpp"

namespace spherebot::cli {
namespace {

namespace fs = std::filesystem;
using std::numbers::pi;

// Unreadable inputs and unwritable outputs.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InputError(fmt::format("cannot write '{}'", path));
  return f;
}

void write_preamble(std::ostream& os, const std::vector<std::string>& lines) {
  for (const auto& l : lines) os << "# " << l << '\n';
}

Scenario scenario_or_default(const std::string& path) {
  return path.empty() ? Scenario{} : load_scenario(path);
}

double heading_of(const Vec3& V) {
  return std::hypot(V.x(), V.y()) > 1e-12 ? std::atan2(V.y(), V.x()) : 0.0;
}

TorqueSchedule coast_after(const TorqueSchedule& sched, double coast, double dt) {
  TorqueSchedule tail = TorqueSchedule::constant(Vec3::Zero(), sched.end(), sched.end() + coast, dt);
  if (sched.segments.empty()) tail.segments.clear();
  if (!sched.plan.empty()) {
    tail.plan.assign(tail.t.size(), PlannedState{vertical(), Vec3::Zero(), sched.plan.back().V});
  }
  return tail;
}

int do_simulate(const Scenario& sc, const std::string& scenario_path, std::ostream& out,
                std::ostream& err) {
  const SystemParams p = sc.system();
  const FullState init = sc.initial_state(p);
  const auto& c = sc.command;

  TorqueSchedule sched;
  if (!c.maneuvers.empty()) {
    if ((init.n - vertical()).norm() > 1e-12 || init.omega.norm() > 1e-12) {
      err << "warning: gaits are planned for a pendulum starting at rest; the initial pendulum "
             "state differs\n";
    }
    const double heading = heading_of(init.V);
    const auto gaits = plan_maneuvers(c.maneuvers, p, init.V, heading);
    sched = compose(gaits, p, c.dt, init.V, heading);
    for (std::size_t k = 0; k < gaits.size(); ++k) {
      fmt::print(out, "gait {}: {} alpha = {:.6f} T = {} phi = {:.6f}\n", k + 1,
                 to_string(gaits[k].kind), gaits[k].alpha, gaits[k].T, gaits[k].phi);
    }
  } else {
    fs::path file = c.torque_file;
    if (file.is_relative() && !scenario_path.empty()) {
      file = fs::path(scenario_path).parent_path() / file;
    }
    std::ifstream in(file);
    if (!in) throw InputError(fmt::format("cannot open torque file '{}'", file.string()));
    try {
      sched = read_schedule_csv(in);
    } catch (const std::runtime_error& e) {
      throw InputError(fmt::format("{}: {}", file.string(), e.what()));
    }
  }
  if (c.coast > 0.0) sched.append(coast_after(sched, c.coast, c.dt));
  for (const auto& w : sched.warnings) err << "warning: " << w << '\n';

  const TrajectoryLog log = simulate(init, sched, c.dt, p);
  const auto header = provenance(sc, p);
  {
    auto f = open_output(sc.output.trajectory);
    write_trajectory_csv(f, log, header);
  }
  if (!sc.output.schedule.empty()) {
    auto f = open_output(sc.output.schedule);
    write_preamble(f, header);
    write_schedule_csv(f, sched);
  }

  double worst_slip = 0.0;
  double worst_drift = 0.0;
  for (const auto& r : log.samples) {
    worst_slip = std::max(worst_slip, r.noslip_residual);
    worst_drift = std::max(worst_drift, std::abs(r.n_drift));
  }
  const LogSample& first = log.front();
  const LogSample& last = log.back();
  fmt::print(out, "t = {:.6g}: speed {:.6f} -> {:.6f}, heading {:.4f} -> {:.4f} deg\n", last.t,
             first.speed(), last.speed(), first.heading() * 180.0 / pi,
             last.heading() * 180.0 / pi);
  fmt::print(out, "position ({:.6f}, {:.6f}), |n - k| = {:.3e}, |omega| = {:.3e}\n",
             last.state.r_s.x(), last.state.r_s.y(), (last.state.n - vertical()).norm(),
             last.state.omega.norm());
  fmt::print(out, "max no-slip residual {:.3e}, max |n| drift {:.3e}\n", worst_slip, worst_drift);
  fmt::print(out, "wrote {} ({} samples)\n", sc.output.trajectory, log.samples.size());
  return kOk;
}

int do_plan(const Scenario& sc, std::ostream& out) {
  const SystemParams p = sc.system();
  const auto& c = sc.command;
  const bool turn = c.psi.has_value();
  const SurfaceKind kind = turn ? SurfaceKind::Psi : SurfaceKind::DeltaV;
  const double target = turn ? *c.psi : *c.dv;
  const char* label = turn ? "psi" : "dV";

  const ResponsePeak peak = max_response(kind, c.T, p, c.vs);
  fmt::print(out, "achievable {} at T = {}: [{:.6f}, {:.6f}] (peak at alpha = {:.6f})\n", label,
             c.T, -peak.value, peak.value, peak.alpha);
  const double alpha = solve_alpha(target, c.T, p, kind, c.vs);
  fmt::print(out, "alpha1 = {:.6f}\n", alpha);
  const auto roots = alpha_roots(std::abs(target), c.T, p, kind, c.vs);
  std::string listed;
  for (double r : roots) listed += fmt::format(" {:.6f}", std::copysign(r, target));
  fmt::print(out, "roots on (0, pi):{}\n", listed.empty() ? " none" : listed);
  fmt::print(out, "{}(alpha1) = {:.9f}\n", label, surface_value(kind, alpha, c.T, p, c.vs));

  if (!sc.output.schedule.empty()) {
    const GaitSpec gait = turn ? GaitSpec{alpha, c.T, pi / 2.0, GaitKind::Turn}
                               : GaitSpec{alpha, c.T, 0.0, GaitKind::Accelerate};
    const Vec3 V0 = turn ? Vec3(c.vs, 0.0, 0.0) : Vec3::Zero();
    const TorqueSchedule sched = gait_torque_schedule(gait, p, c.dt, 0.0, V0);
    auto f = open_output(sc.output.schedule);
    write_preamble(f, provenance(sc, p));
    write_schedule_csv(f, sched);
    fmt::print(out, "wrote {}\n", sc.output.schedule);
  }
  return kOk;
}

int do_surface(const Scenario& sc, std::ostream& out) {
  const SystemParams p = sc.system();
  const auto& c = sc.command;
  if (c.surface == SurfaceKind::Psi && !(c.vs > 0.0)) {
    throw ScenarioValidationError("invalid 'vs': psi surface needs a positive vs");
  }
  const ResponseSurface surf = default_surface(c.surface, p, c.vs);
  auto f = open_output(sc.output.surface);
  auto header = provenance(sc, p);
  if (c.surface == SurfaceKind::Psi) header.push_back(fmt::format("V_s = {}", c.vs));
  write_preamble(f, header);
  write_surface_csv(f, surf);
  fmt::print(out, "wrote {} ({} x {} grid)\n", sc.output.surface, surf.alphas.size(),
             surf.periods.size());
  return kOk;
}

int do_phase(const Scenario& sc, std::ostream& out) {
  const SystemParams p = sc.system();
  const auto& c = sc.command;
  const PhasePortrait portrait = phase_portrait(c.a0, p, {}, c.dt);
  auto header = provenance(sc, p);
  header.push_back(fmt::format("a0 = {}", c.a0));

  const fs::path grid_path = sc.output.phase;
  const fs::path stem = grid_path.parent_path() / grid_path.stem();
  const std::string rest_path = stem.string() + "_rest.csv";
  const std::string eq_path = stem.string() + "_equilibria.json";
  {
    auto f = open_output(grid_path.string());
    write_preamble(f, header);
    write_phase_csv(f, portrait);
  }
  {
    auto f = open_output(rest_path);
    write_preamble(f, header);
    write_rest_orbit_csv(f, portrait, p);
  }
  {
    auto f = open_output(eq_path);
    write_equilibria_json(f, portrait, header);
  }
  for (const auto& e : portrait.equilibria) {
    fmt::print(out, "{} at theta = {:.6f}\n", to_string(e.kind), e.theta_star);
  }
  if (portrait.rest_period > 0.0) {
    fmt::print(out, "orbit through rest is closed, period {:.6f}\n", portrait.rest_period);
  } else {
    fmt::print(out, "orbit through rest is not closed\n");
  }
  fmt::print(out, "wrote {}, {}, {}\n", grid_path.string(), rest_path, eq_path);
  return kOk;
}

int do_verify(const Scenario& sc, std::ostream& out) {
  const auto results = run_invariant_suite(sc.system());
  for (const auto& r : results) {
    fmt::print(out, "{} {}: {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
  }
  return all_passed(results) ? kOk : kCheckFailed;
}

int dispatch(const Scenario& sc, const std::string& path, std::ostream& out, std::ostream& err) {
  switch (sc.command.kind) {
    case CommandKind::Simulate: return do_simulate(sc, path, out, err);
    case CommandKind::Plan: return do_plan(sc, out);
    case CommandKind::Surface: return do_surface(sc, out);
    case CommandKind::Phase: return do_phase(sc, out);
    case CommandKind::Verify: return do_verify(sc, out);
  }
  return kValidationError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pendulum-driven spherical robot: gait planning and simulation", "spherebot"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string scenario_path;
  std::string out_path;
  std::string psi_text;
  std::string kind_text = "dv";
  double dv = 0.0;
  double T = 5.0;
  double vs = 0.0;
  double surface_vs = 0.6;
  double a0 = 0.1;
  double dt = 1e-3;

  auto* sim = app.add_subcommand("simulate", "Run the maneuvers or torque file of a scenario");
  sim->add_option("scenario", scenario_path, "Scenario file")->required();

  auto* runner = app.add_subcommand("run", "Run whatever command a scenario names");
  runner->add_option("scenario", scenario_path, "Scenario file")->required();

  auto* plan = app.add_subcommand("plan", "Solve the gait amplitude for a speed change or turn");
  auto* dv_opt = plan->add_option("--dv", dv, "Speed change");
  auto* psi_opt = plan->add_option("--psi", psi_text, "Turn angle (radians, or e.g. 40deg)");
  dv_opt->excludes(psi_opt);
  plan->add_option("--T", T, "Gait duration")->capture_default_str();
  plan->add_option("--vs", vs, "Speed before the turn");
  plan->add_option("--scenario", scenario_path, "Take parameters from this scenario");
  plan->add_option("--out", out_path, "Write the torque schedule CSV here");
  plan->add_option("--dt", dt, "Schedule sample spacing")->capture_default_str();

  auto* surface = app.add_subcommand("surface", "Tabulate dV or psi over (alpha, T)");
  surface->add_option("--kind", kind_text, "dv or psi")
      ->check(CLI::IsMember({"dv", "psi"}))
      ->capture_default_str();
  surface->add_option("--out", out_path, "Output CSV")->required();
  surface->add_option("--vs", surface_vs, "Speed before the turn (psi only)")->capture_default_str();
  surface->add_option("--scenario", scenario_path, "Take parameters from this scenario");

  auto* phase = app.add_subcommand("phase", "Phase portrait of constant-acceleration motion");
  phase->add_option("--a0", a0, "Acceleration")->required();
  phase->add_option("--out", out_path, "Output grid CSV")->required();
  phase->add_option("--dt", dt, "Step for the orbit through rest")->capture_default_str();
  phase->add_option("--scenario", scenario_path, "Take parameters from this scenario");

  auto* verify = app.add_subcommand("verify", "Run the invariant suite");
  verify->add_option("--scenario", scenario_path, "Take parameters from this scenario");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationError;
  }

  try {
    if (*sim || *runner) {
      const Scenario sc = load_scenario(scenario_path);
      if (*sim && sc.command.kind != CommandKind::Simulate) {
        throw ScenarioValidationError(fmt::format(
            "{}: command is '{}', not 'simulate' (use 'run')", scenario_path,
            to_string(sc.command.kind)));
      }
      return dispatch(sc, scenario_path, out, err);
    }

    Scenario sc = scenario_or_default(scenario_path);
    sc.output = {};
    auto& c = sc.command;
    if (*plan) {
      if (!*dv_opt && !*psi_opt) throw std::invalid_argument("plan needs --dv or --psi");
      c.kind = CommandKind::Plan;
      c.dv.reset();
      c.psi.reset();
      if (*dv_opt) c.dv = dv;
      if (*psi_opt) {
        c.psi = parse_angle(psi_text);
        if (!(vs > 0.0)) throw std::invalid_argument("turn planning needs --vs > 0");
      }
      c.T = T;
      c.vs = vs;
      c.dt = dt;
      if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("--T and --dt must be positive");
      sc.output.schedule = out_path;
      return do_plan(sc, out);
    }
    if (*surface) {
      c.kind = CommandKind::Surface;
      c.surface = kind_text == "psi" ? SurfaceKind::Psi : SurfaceKind::DeltaV;
      c.vs = surface_vs;
      sc.output.surface = out_path;
      return do_surface(sc, out);
    }
    if (*phase) {
      c.kind = CommandKind::Phase;
      c.a0 = a0;
      c.dt = dt;
      if (!std::isfinite(a0) || !(dt > 0.0)) {
        throw std::invalid_argument("--a0 must be finite and --dt positive");
      }
      sc.output.phase = out_path;
      return do_phase(sc, out);
    }
    c.kind = CommandKind::Verify;
    return do_verify(sc, out);
  } catch (const UnreachableTarget& e) {
    fmt::print(err, "error: {} (achievable maximum {:.6f})\n", e.what(), e.achievable_max());
    return kInfeasible;
  } catch (const InfeasibleConfiguration& e) {
    fmt::print(err, "error: infeasible configuration: {}\n", e.what());
    return kInfeasible;
  } catch (const ScenarioParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kValidationError;
  } catch (const ScenarioValidationError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kValidationError;
  } catch (const InputError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kValidationError;
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kValidationError;
  } catch (const std::exception& e) {
    fmt::print(err, "internal error: {}\n", e.what());
    return kCheckFailed;
  }
}

}  // namespace spherebot::cli
