#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spherebot::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kValidationError = 2,
  kInfeasible = 3,
};

/// Runs one command line (without the program name). Results go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spherebot::cli
