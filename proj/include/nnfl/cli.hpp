#pragma once

#include <ostream>

namespace nnfl {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitSoft = 1, kExitUsage = 2, kExitIo = 3 };

/// Parses argv, runs one subcommand, writes artifacts plus run-manifest.json
/// to the output directory. Diagnostics go to `err`.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace nnfl
