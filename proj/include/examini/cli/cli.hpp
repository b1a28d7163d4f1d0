#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace examini::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,  // regression or check failure
  kUsage = 2,        // bad arguments or invalid config
  kRuntime = 3,
};

/// Parses `args` (without the program name), runs the subcommand and
/// returns the process exit code. Never throws.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace examini::cli
