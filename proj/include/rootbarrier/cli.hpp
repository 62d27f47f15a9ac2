#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rootbarrier {

/// Exit codes of the command-line front end.
enum ExitCode : int { exit_ok = 0, exit_input = 2, exit_market = 3, exit_solver = 4 };

/// Runs the command line `args` (args[0] is the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rootbarrier
