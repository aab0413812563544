#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rmwsnap::cli {

enum ExitCode : int { kClean = 0, kViolation = 1, kConfigError = 2 };

/// Runs one command line (args exclude the program name). Summary lines go
/// to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rmwsnap::cli
