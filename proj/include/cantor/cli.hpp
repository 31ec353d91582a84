#pragma once
// cantor-shrink command line: build, verify and export subcommands.

#include <iosfwd>
#include <string>
#include <vector>

namespace cantor {

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitUsage = 2 };

/// args excludes the program name. Reports go to --out or, without it, to out.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cantor
