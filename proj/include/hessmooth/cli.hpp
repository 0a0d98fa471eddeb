#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hessmooth {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitInvalid = 2,
  kExitSolver = 3,
  kExitIo = 4,
};

/// Runs `hessmooth <subcommand> [flags]`; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace hessmooth
