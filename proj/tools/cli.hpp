#pragma once

#include <iosfwd>

namespace ratiorules::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

/// Runs one subcommand. `in` backs `-` inputs, `out` backs `-` outputs.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace ratiorules::cli
