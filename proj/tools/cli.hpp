#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aoisched::cli {

enum ExitCode : int {
  kOk = 0,
  kPropertyViolation = 1,
  kUsage = 2,
  kNotConverged = 3,
};

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aoisched::cli
