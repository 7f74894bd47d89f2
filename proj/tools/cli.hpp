#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mpspec::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kPass = 0, kFail = 1, kUsage = 2 };

/// Runs one invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mpspec::cli
