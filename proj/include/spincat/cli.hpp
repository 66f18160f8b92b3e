#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spincat {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

/// Runs the command line (arguments after the program name). Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spincat
