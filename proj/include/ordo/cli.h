#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ordo::cli {

enum ExitCode : int {
  kOk = 0,
  kRejected = 1,  // parse or type error
  kRuntime = 2,   // stuck, oracle violation or leftover heap
  kFuel = 3,
  kUsage = 64,
};

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ordo::cli
