#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gtrans {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitInput = 3, kExitConvergence = 4, kExitInternal = 5 };

/// Parses `args` (args[0] is the program name), runs the subcommand and returns
/// the process exit code. Failures print a one-line JSON error object to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gtrans
