#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ddmpc::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,  ///< excitation check, sweep verdict or membership test failed
  kConfigError = 2,  ///< invalid configuration, missing or unreadable files
  kInfeasible = 3,   ///< closed-loop run hit an infeasible problem
};

/// Runs the command line `args` (without the program name). Human-readable
/// results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ddmpc::cli
