#pragma once

#include <iosfwd>

namespace aqmlab {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,     // bad flags, config, I/O or a failed validation
  kExitNotConverged = 2 // train: artifacts written but the map never converged
};

/// Parses argv and runs one of the train / run / compare / validate-som
/// subcommands. Progress goes to `out`, diagnostics to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace aqmlab
