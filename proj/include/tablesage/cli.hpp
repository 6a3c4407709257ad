#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tablesage {

enum ExitCode : int {
  kExitOk = 0,
  // Invalid flags, configuration or data.
  kExitConfig = 1,
  // Every unit failed on transport.
  kExitTransport = 2,
  // Some units have no answer.
  kExitPartial = 3,
};

// Runs one command line (without the program name). Errors are reported on
// `err` and mapped to an exit code; nothing is thrown.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tablesage
