#include "spherebot/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace spherebot {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

double to_number(const std::string& text, const std::string& key, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ScenarioParseError(
      fmt::format("line {}: value of '{}' is not a number: '{}'", line, key, text));
}

std::vector<double> to_numbers(const std::string& text, std::size_t count,
                               const std::string& key, int line) {
  const auto words = split_ws(text);
  if (words.size() != count) {
    throw ScenarioParseError(
        fmt::format("line {}: '{}' expects {} numbers, got {}", line, key, count, words.size()));
  }
  std::vector<double> out;
  for (const auto& w : words) out.push_back(to_number(w, key, line));
  return out;
}

std::string fmt_num(double v) { return fmt::format("{}", v); }

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"params", {"disk_radius_ratio", "rod_ratio", "shell_mass", "shell_inertia_coeff"}},
      {"initial", {"position", "velocity", "pendulum_axis", "pendulum_rate", "spin"}},
      {"command",
       {"name", "dt", "maneuver", "torque_file", "coast", "dv", "psi", "T", "vs", "kind", "a0"}},
      {"output", {"trajectory", "schedule", "surface", "phase"}},
  };
  return keys;
}

CommandKind command_from(const std::string& name, int line) {
  if (name == "simulate") return CommandKind::Simulate;
  if (name == "plan") return CommandKind::Plan;
  if (name == "surface") return CommandKind::Surface;
  if (name == "phase") return CommandKind::Phase;
  if (name == "verify") return CommandKind::Verify;
  throw ScenarioParseError(fmt::format("line {}: unknown command name '{}'", line, name));
}

Maneuver maneuver_from(const std::string& text, int line) {
  const auto words = split_ws(text);
  if (words.size() != 3) {
    throw ScenarioParseError(
        fmt::format("line {}: maneuver expects '<kind> <target> <T>', got '{}'", line, text));
  }
  Maneuver m;
  if (words[0] == "accelerate") {
    m.kind = GaitKind::Accelerate;
  } else if (words[0] == "brake") {
    m.kind = GaitKind::Brake;
  } else if (words[0] == "turn") {
    m.kind = GaitKind::Turn;
  } else {
    throw ScenarioParseError(fmt::format("line {}: unknown maneuver kind '{}'", line, words[0]));
  }
  try {
    m.target = m.kind == GaitKind::Turn ? parse_angle(words[1])
                                        : to_number(words[1], "maneuver", line);
  } catch (const std::invalid_argument& e) {
    throw ScenarioParseError(fmt::format("line {}: {}", line, e.what()));
  }
  m.T = to_number(words[2], "maneuver", line);
  return m;
}

void validate(const Scenario& s) {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ScenarioValidationError(fmt::format("invalid '{}': {}", key, why));
  };
  const auto& c = s.command;
  if (!(c.dt > 0.0)) fail("command.dt", "must be positive");
  if (c.coast < 0.0) fail("command.coast", "must be non-negative");
  if (!(c.T > 0.0)) fail("command.T", "must be positive");
  for (const auto& m : c.maneuvers) {
    if (!(m.T > 0.0)) fail("command.maneuver", "duration must be positive");
    if (m.kind != GaitKind::Turn && !(m.target >= 0.0)) {
      fail("command.maneuver", "speed change must be non-negative (use brake to slow down)");
    }
  }
  if (c.kind == CommandKind::Simulate) {
    if (c.maneuvers.empty() == c.torque_file.empty()) {
      fail("command.maneuver", "simulate needs either maneuvers or a torque_file, not both");
    }
    if (s.output.trajectory.empty()) fail("output.trajectory", "simulate needs an output path");
  }
  if (c.kind == CommandKind::Plan) {
    if (c.dv.has_value() == c.psi.has_value()) fail("command.dv", "plan needs exactly one of dv, psi");
    if (c.psi && !(c.vs > 0.0)) fail("command.vs", "turn planning needs a positive vs");
  }
  if (c.kind == CommandKind::Surface && c.surface == SurfaceKind::Psi && !(c.vs > 0.0)) {
    fail("command.vs", "psi surface needs a positive vs");
  }
  if (c.kind == CommandKind::Surface && s.output.surface.empty()) {
    fail("output.surface", "surface needs an output path");
  }
  if (c.kind == CommandKind::Phase && s.output.phase.empty()) {
    fail("output.phase", "phase needs an output path");
  }
  if (std::abs(s.initial.pendulum_axis.norm() - 1.0) > kUnitNormTolerance) {
    fail("initial.pendulum_axis", "must be a unit vector");
  }
  (void)s.system();
}

}  // namespace

const char* to_string(CommandKind kind) {
  switch (kind) {
    case CommandKind::Simulate: return "simulate";
    case CommandKind::Plan: return "plan";
    case CommandKind::Surface: return "surface";
    case CommandKind::Phase: return "phase";
    case CommandKind::Verify: return "verify";
  }
  return "?";
}

bool operator==(const Maneuver& a, const Maneuver& b) {
  return a.kind == b.kind && a.target == b.target && a.T == b.T;
}

double parse_angle(const std::string& text) {
  std::string body = text;
  double scale = 1.0;
  if (body.size() > 3 && body.ends_with("deg")) {
    body.resize(body.size() - 3);
    scale = std::numbers::pi / 180.0;
  } else if (body.size() > 3 && body.ends_with("rad")) {
    body.resize(body.size() - 3);
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(body, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != body.size() || !std::isfinite(v)) {
    throw std::invalid_argument(fmt::format("not an angle: '{}'", text));
  }
  return v * scale;
}

SystemParams Scenario::system() const {
  SystemParams p;
  try {
    p = derive_params(params.disk_radius_ratio, params.rod_ratio, params.shell_mass,
                      params.shell_inertia_coeff);
  } catch (const std::invalid_argument& e) {
    throw ScenarioValidationError(fmt::format("invalid [params]: {}", e.what()));
  }
  if (!p.feasible()) {
    throw ScenarioValidationError(fmt::format(
        "invalid [params]: geometry violates i + m R_t^2 > m R_o R_t (i0 = {:.6g}, R_o R_t = "
        "{:.6g}); increase disk_radius_ratio or decrease rod_ratio",
        p.i0(), p.coupling()));
  }
  return p;
}

FullState Scenario::initial_state(const SystemParams& p) const {
  const Vec3 Omega = shell_rate_for_velocity({initial.V1, initial.V2, 0.0}, initial.spin, p);
  return make_state(Omega, initial.pendulum_axis.normalized(), initial.pendulum_rate,
                    {initial.x, initial.y, 0.0}, p);
}

Scenario parse_scenario(std::istream& is, const std::string& source) {
  Scenario s;
  std::string section;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  try {
    while (std::getline(is, line)) {
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          throw ScenarioParseError(fmt::format("line {}: unterminated section header", line_no));
        }
        section = trim(line.substr(1, line.size() - 2));
        if (!known_keys().contains(section)) {
          throw ScenarioParseError(fmt::format("line {}: unknown section [{}]", line_no, section));
        }
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ScenarioParseError(fmt::format("line {}: expected 'key = value'", line_no));
      }
      if (section.empty()) {
        throw ScenarioParseError(fmt::format("line {}: key outside of any section", line_no));
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (!known_keys().at(section).contains(key)) {
        throw ScenarioValidationError(
            fmt::format("line {}: unknown key '{}' in [{}]", line_no, key, section));
      }
      const std::string full = section + "." + key;
      if (key != "maneuver" && !seen.insert(full).second) {
        throw ScenarioParseError(fmt::format("line {}: duplicate key '{}'", line_no, full));
      }
      if (value.empty()) {
        throw ScenarioParseError(fmt::format("line {}: empty value for '{}'", line_no, full));
      }
      auto num = [&] { return to_number(value, full, line_no); };

      if (section == "params") {
        auto& p = s.params;
        if (key == "disk_radius_ratio") p.disk_radius_ratio = num();
        else if (key == "rod_ratio") p.rod_ratio = num();
        else if (key == "shell_mass") p.shell_mass = num();
        else p.shell_inertia_coeff = num();
      } else if (section == "initial") {
        auto& in = s.initial;
        if (key == "position") {
          const auto v = to_numbers(value, 2, full, line_no);
          in.x = v[0];
          in.y = v[1];
        } else if (key == "velocity") {
          const auto v = to_numbers(value, 2, full, line_no);
          in.V1 = v[0];
          in.V2 = v[1];
        } else if (key == "pendulum_axis") {
          const auto v = to_numbers(value, 3, full, line_no);
          in.pendulum_axis = {v[0], v[1], v[2]};
        } else if (key == "pendulum_rate") {
          const auto v = to_numbers(value, 3, full, line_no);
          in.pendulum_rate = {v[0], v[1], v[2]};
        } else {
          in.spin = num();
        }
      } else if (section == "command") {
        auto& c = s.command;
        if (key == "name") c.kind = command_from(value, line_no);
        else if (key == "dt") c.dt = num();
        else if (key == "maneuver") c.maneuvers.push_back(maneuver_from(value, line_no));
        else if (key == "torque_file") c.torque_file = value;
        else if (key == "coast") c.coast = num();
        else if (key == "dv") c.dv = num();
        else if (key == "psi") {
          try {
            c.psi = parse_angle(value);
          } catch (const std::invalid_argument& e) {
            throw ScenarioParseError(fmt::format("line {}: {}", line_no, e.what()));
          }
        } else if (key == "T") c.T = num();
        else if (key == "vs") c.vs = num();
        else if (key == "kind") {
          if (value == "dv") c.surface = SurfaceKind::DeltaV;
          else if (value == "psi") c.surface = SurfaceKind::Psi;
          else throw ScenarioParseError(fmt::format("line {}: kind must be dv or psi", line_no));
        } else {
          c.a0 = num();
        }
      } else {
        auto& o = s.output;
        if (key == "trajectory") o.trajectory = value;
        else if (key == "schedule") o.schedule = value;
        else if (key == "surface") o.surface = value;
        else o.phase = value;
      }
    }
    validate(s);
  } catch (const ScenarioParseError& e) {
    throw ScenarioParseError(fmt::format("{}: {}", source, e.what()));
  } catch (const ScenarioValidationError& e) {
    throw ScenarioValidationError(fmt::format("{}: {}", source, e.what()));
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioValidationError(fmt::format("cannot open scenario file '{}'", path));
  return parse_scenario(in, path);
}

std::string serialize(const Scenario& s) {
  std::string out;
  auto line = [&out](const std::string& key, const std::string& value) {
    out += key + " = " + value + "\n";
  };
  out += "[params]\n";
  line("disk_radius_ratio", fmt_num(s.params.disk_radius_ratio));
  line("rod_ratio", fmt_num(s.params.rod_ratio));
  line("shell_mass", fmt_num(s.params.shell_mass));
  line("shell_inertia_coeff", fmt_num(s.params.shell_inertia_coeff));

  const auto& in = s.initial;
  out += "\n[initial]\n";
  line("position", fmt_num(in.x) + " " + fmt_num(in.y));
  line("velocity", fmt_num(in.V1) + " " + fmt_num(in.V2));
  line("pendulum_axis", fmt_num(in.pendulum_axis.x()) + " " + fmt_num(in.pendulum_axis.y()) +
                            " " + fmt_num(in.pendulum_axis.z()));
  line("pendulum_rate", fmt_num(in.pendulum_rate.x()) + " " + fmt_num(in.pendulum_rate.y()) +
                            " " + fmt_num(in.pendulum_rate.z()));
  line("spin", fmt_num(in.spin));

  const auto& c = s.command;
  out += "\n[command]\n";
  line("name", to_string(c.kind));
  line("dt", fmt_num(c.dt));
  for (const auto& m : c.maneuvers) {
    line("maneuver", fmt::format("{} {} {}", to_string(m.kind), fmt_num(m.target), fmt_num(m.T)));
  }
  if (!c.torque_file.empty()) line("torque_file", c.torque_file);
  line("coast", fmt_num(c.coast));
  if (c.dv) line("dv", fmt_num(*c.dv));
  if (c.psi) line("psi", fmt_num(*c.psi));
  line("T", fmt_num(c.T));
  line("vs", fmt_num(c.vs));
  line("kind", to_string(c.surface));
  line("a0", fmt_num(c.a0));

  const auto& o = s.output;
  out += "\n[output]\n";
  if (!o.trajectory.empty()) line("trajectory", o.trajectory);
  if (!o.schedule.empty()) line("schedule", o.schedule);
  if (!o.surface.empty()) line("surface", o.surface);
  if (!o.phase.empty()) line("phase", o.phase);
  return out;
}

std::vector<std::string> provenance(const Scenario& s, const SystemParams& p) {
  return {
      kToolVersion,
      fmt::format("params: disk_radius_ratio={} rod_ratio={} shell_mass={} shell_inertia_coeff={}",
                  fmt_num(s.params.disk_radius_ratio), fmt_num(s.params.rod_ratio),
                  fmt_num(s.params.shell_mass), fmt_num(s.params.shell_inertia_coeff)),
      fmt::format("program units: {}", describe(p)),
      fmt::format("units: mass = pendulum mass m; time t0 = sqrt((i+j)/(m g R_t)); length x0 = "
                  "g t0^2 = {} R_o; g = 1",
                  fmt_num(p.length_unit)),
      fmt::format("command: {} dt={}", to_string(s.command.kind), fmt_num(s.command.dt)),
  };
}

}  // namespace spherebot
