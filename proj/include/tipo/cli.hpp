#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tipo {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitAcceptance = 3,
};

// Entry point of the `tipo` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tipo
