#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace r2margin {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitConvergence = 3,
  kExitExcessiveSkips = 4,
};

/// Runs the command line tool; args excludes the program name. Subcommands:
/// ci, test, fit, simulate, plot. R2MARGIN_THREADS sets the simulation
/// thread count (0 = auto).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace r2margin
