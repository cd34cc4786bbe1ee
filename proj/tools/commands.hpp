#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace imgeval::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;
inline constexpr int kExitInternalError = 2;

/// Runs the command line `args` (args[0] is the program name) and returns
/// the exit code. Diagnostics go to `err`, progress to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace imgeval::cli
