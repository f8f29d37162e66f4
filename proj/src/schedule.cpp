#include "spherebot/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace spherebot {
namespace {

TorqueLaw linear_law(std::vector<double> t, std::vector<Vec3> Q) {
  auto times = std::make_shared<const std::vector<double>>(std::move(t));
  auto values = std::make_shared<const std::vector<Vec3>>(std::move(Q));
  return [times, values](double at) -> Vec3 {
    const auto& ts = *times;
    const auto& qs = *values;
    if (ts.size() == 1 || at <= ts.front()) return qs.front();
    if (at >= ts.back()) return qs.back();
    const auto hi = static_cast<std::size_t>(
        std::upper_bound(ts.begin(), ts.end(), at) - ts.begin());
    const std::size_t lo = hi - 1;
    const double w = (at - ts[lo]) / (ts[hi] - ts[lo]);
    return (1.0 - w) * qs[lo] + w * qs[hi];
  };
}

}  // namespace

std::vector<TorqueSegment> TorqueSchedule::pieces() const {
  if (!segments.empty()) return segments;
  std::vector<TorqueSegment> out;
  std::size_t begin = 0;
  for (std::size_t k = 1; k <= t.size(); ++k) {
    if (k == t.size() || t[k] == t[k - 1]) {
      std::vector<double> ts(t.begin() + begin, t.begin() + k);
      std::vector<Vec3> qs(Q.begin() + begin, Q.begin() + k);
      if (ts.size() > 1 || out.empty()) {
        out.push_back({ts.front(), ts.back(), linear_law(std::move(ts), std::move(qs))});
      }
      begin = k;
    }
  }
  return out;
}

void TorqueSchedule::append(const TorqueSchedule& next) {
  if (next.empty()) return;
  if (!empty() && std::abs(next.start() - end()) > 1e-9 * std::max(1.0, std::abs(end()))) {
    throw std::invalid_argument(
        fmt::format("schedule gap: next starts at {} but current ends at {}", next.start(), end()));
  }
  if (!empty() && (plan.empty() != next.plan.empty())) {
    throw std::invalid_argument("cannot append schedules with and without planned states");
  }
  if (!empty() && (segments.empty() != next.segments.empty())) {
    throw std::invalid_argument("cannot append analytic and sampled schedules");
  }
  t.insert(t.end(), next.t.begin(), next.t.end());
  Q.insert(Q.end(), next.Q.begin(), next.Q.end());
  plan.insert(plan.end(), next.plan.begin(), next.plan.end());
  segments.insert(segments.end(), next.segments.begin(), next.segments.end());
  warnings.insert(warnings.end(), next.warnings.begin(), next.warnings.end());
}

TorqueSchedule TorqueSchedule::constant(const Vec3& torque, double t0, double t1, double dt) {
  if (!(dt > 0.0) || !(t1 >= t0)) {
    throw std::invalid_argument("constant schedule needs dt > 0 and t1 >= t0");
  }
  TorqueSchedule s;
  const auto steps = static_cast<long>(std::ceil((t1 - t0) / dt - 1e-9));
  for (long k = 0; k <= steps; ++k) {
    s.t.push_back(k == steps ? t1 : t0 + static_cast<double>(k) * dt);
    s.Q.push_back(torque);
  }
  s.segments.push_back({t0, t1, [torque](double) { return torque; }});
  return s;
}

void TorqueSchedule::validate() const {
  if (t.empty()) throw std::invalid_argument("torque schedule is empty");
  if (Q.size() != t.size()) throw std::invalid_argument("torque schedule size mismatch");
  if (!plan.empty() && plan.size() != t.size()) {
    throw std::invalid_argument("planned-state size mismatch");
  }
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (t[k] < t[k - 1]) {
      throw std::invalid_argument(fmt::format("torque schedule time decreases at sample {}", k));
    }
  }
}

void write_schedule_csv(std::ostream& os, const TorqueSchedule& s) {
  const bool planned = !s.plan.empty();
  os << "t,Q1,Q2,Q3";
  if (planned) os << ",n1,n2,n3,w1,w2,w3,V1,V2";
  os << '\n';
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    fmt::print(os, "{},{},{},{}", s.t[k], s.Q[k].x(), s.Q[k].y(),
               s.Q[k].z());
    if (planned) {
      const auto& p = s.plan[k];
      fmt::print(os, ",{},{},{},{},{},{},{},{}", p.n.x(),
                 p.n.y(), p.n.z(), p.omega.x(), p.omega.y(), p.omega.z(), p.V.x(), p.V.y());
    }
    os << '\n';
  }
}

TorqueSchedule read_schedule_csv(std::istream& is) {
  TorqueSchedule s;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line.rfind("t,Q1,Q2,Q3", 0) != 0) {
        throw std::runtime_error(
            fmt::format("line {}: expected header starting with t,Q1,Q2,Q3", line_no));
      }
      header_seen = true;
      continue;
    }
    std::istringstream fields(line);
    std::string cell;
    double v[4];
    for (double& x : v) {
      if (!std::getline(fields, cell, ',')) {
        throw std::runtime_error(fmt::format("line {}: expected at least 4 columns", line_no));
      }
      try {
        std::size_t used = 0;
        x = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::runtime_error(fmt::format("line {}: not a number: '{}'", line_no, cell));
      }
    }
    s.t.push_back(v[0]);
    s.Q.emplace_back(v[1], v[2], v[3]);
  }
  if (!header_seen || s.t.empty()) throw std::runtime_error("torque file has no samples");
  s.validate();
  return s;
}

}  // namespace spherebot
