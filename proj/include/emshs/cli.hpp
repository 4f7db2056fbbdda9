#pragma once

#include <string>
#include <vector>

namespace emshs {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNonConvergence = 3 };

/// Runs one subcommand. `args` excludes the program name. Errors are reported
/// as a single line on stderr.
int dispatch(const std::vector<std::string>& args);

}  // namespace emshs
