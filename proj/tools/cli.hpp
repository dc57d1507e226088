#pragma once

#include <ostream>

namespace autocrop::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2 };

/// Entry point shared by the `autocrop` binary and the tests. Normal output
/// goes to `out`; diagnostics, progress and usage text go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace autocrop::cli
