#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flatproc::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationFailed = 1,
  kUsageError = 2,
  kIoError = 3,
  kBudgetExceeded = 4,
};

// Runs the command line `args` (args[0] is the program name). Reports go to
// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace flatproc::cli
