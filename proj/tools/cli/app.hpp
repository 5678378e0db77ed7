#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nuctk::cli {

enum ExitCode : int { kOk = 0, kInvalidConfig = 2, kNumericalFailure = 3 };

/// Runs one `nuctk` invocation. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nuctk::cli
