#pragma once

// Quick invariant suite run by `spherebot verify`.

#include <string>
#include <vector>

#include "spherebot/core.hpp"

namespace spherebot {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run_invariant_suite(const SystemParams& params);

inline bool all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    if (!r.passed) return false;
  }
  return true;
}

}  // namespace spherebot
