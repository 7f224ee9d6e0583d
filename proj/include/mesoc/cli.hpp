#pragma once

#include <ostream>
#include <span>
#include <string>

namespace mesoc::cli {

enum ExitCode : int {
  kOk = 0,
  kPropertyViolation = 1,
  kParseError = 2,
  kDimensionError = 3,
  kNonConvergence = 4,
};

/// Runs one CLI invocation. `args` excludes the program name. JSON reports go
/// to `out`, diagnostics to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace mesoc::cli
