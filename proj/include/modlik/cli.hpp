#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace modlik::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInternalError = 1,
  kUsageError = 2,
  kIoError = 3,
  kNumericalError = 4,
};

// Entry point for the `modlik` tool. args[0] is the program name.
// Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace modlik::cli
