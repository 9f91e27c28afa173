#pragma once

#include <iosfwd>

namespace cvxreg::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kNotConverged = 2,
  kNumericalError = 3,
};

/// Runs one `cvxreg` subcommand. Regular output goes to `out`, messages
/// and errors to `err`; the return value is the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cvxreg::cli
