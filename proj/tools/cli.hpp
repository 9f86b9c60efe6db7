// Command-line front end. Kept as a library so the subcommands can also be
// driven in-process (tests, acceptance runs).
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pfgpo::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2 };

/// args[0] is the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pfgpo::cli
