#pragma once

// Scenario files: flat `key = value` text grouped in [sections].
//
//   [params]     disk_radius_ratio, rod_ratio, shell_mass, shell_inertia_coeff
//   [initial]    position (x y), velocity (V1 V2), pendulum_axis (n1 n2 n3),
//                pendulum_rate (w1 w2 w3), spin
//   [command]    name = simulate | plan | surface | phase | verify, plus options
//   [output]     trajectory, schedule, surface, phase
//
// '#' starts a comment. `maneuver = <accelerate|brake|turn> <target> <T>` may
// repeat and keeps its order; turn targets are angles ("40deg" or radians).

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spherebot/core.hpp"
#include "spherebot/gait.hpp"

namespace spherebot {

/// Malformed scenario text; the message carries the line number.
class ScenarioParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Well-formed but invalid scenario; the message names the offending key.
class ScenarioValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class CommandKind { Simulate, Plan, Surface, Phase, Verify };

const char* to_string(CommandKind kind);

struct ParamsBlock {
  double disk_radius_ratio = kDefaultDiskRadiusRatio;
  double rod_ratio = kDefaultRodRatio;
  double shell_mass = kDefaultShellMass;
  double shell_inertia_coeff = kDefaultShellInertiaCoeff;

  bool operator==(const ParamsBlock&) const = default;
};

struct InitialBlock {
  double x = 0.0;
  double y = 0.0;
  double V1 = 0.0;
  double V2 = 0.0;
  Vec3 pendulum_axis = Vec3::UnitZ();
  Vec3 pendulum_rate = Vec3::Zero();
  double spin = 0.0;

  bool operator==(const InitialBlock&) const = default;
};

struct CommandBlock {
  CommandKind kind = CommandKind::Simulate;
  double dt = 1e-3;
  // simulate
  std::vector<Maneuver> maneuvers;
  std::string torque_file;
  double coast = 0.0;
  // plan
  std::optional<double> dv;
  std::optional<double> psi;
  double T = 5.0;
  double vs = 0.0;
  // surface
  SurfaceKind surface = SurfaceKind::DeltaV;
  // phase
  double a0 = 0.1;

  bool operator==(const CommandBlock&) const = default;
};

struct OutputBlock {
  std::string trajectory;
  std::string schedule;
  std::string surface;
  std::string phase;

  bool operator==(const OutputBlock&) const = default;
};

struct Scenario {
  ParamsBlock params;
  InitialBlock initial;
  CommandBlock command;
  OutputBlock output;

  bool operator==(const Scenario&) const = default;

  /// Program-unit parameters. Throws ScenarioValidationError when the
  /// geometry is invalid or violates i + m R_t^2 > m R_o R_t.
  SystemParams system() const;

  FullState initial_state(const SystemParams& params) const;
};

bool operator==(const Maneuver& a, const Maneuver& b);

/// Parses and validates. `source` names the input in error messages.
Scenario parse_scenario(std::istream& is, const std::string& source = "<scenario>");

Scenario load_scenario(const std::string& path);

/// Canonical text form; parse_scenario(serialize(s)) == s.
std::string serialize(const Scenario& scenario);

/// Parses an angle: "40deg" is degrees, a bare number or "rad" suffix is radians.
double parse_angle(const std::string& text);

/// Comment lines recording the parameters, unit conventions, step and tool
/// version; written at the top of every output file.
std::vector<std::string> provenance(const Scenario& scenario, const SystemParams& params);

inline constexpr const char* kToolVersion = "spherebot 0.1.0";

}  // namespace spherebot
