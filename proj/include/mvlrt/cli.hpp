#ifndef MVLRT_CLI_HPP
#define MVLRT_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace mvlrt {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 2,
  kExitAssumption = 3,
  kExitIo = 4,
};

/// Runs the command line with `args` (excluding the program name). Results go
/// to `out`, warnings and diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mvlrt

#endif  // MVLRT_CLI_HPP
