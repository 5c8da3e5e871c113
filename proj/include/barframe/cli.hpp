#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace barframe {

// Exit codes: 0 certified / ok, 1 usage or I/O error, 2 converged but not
// certified, 3 solver failure.
enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitUncertified = 2, kExitSolver = 3 };

// args exclude the program name
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace barframe
