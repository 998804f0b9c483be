#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cier::app {

enum ExitCode : int { Success = 0, Usage = 2, DataError = 3, NumericalFailure = 4 };

/// Entry point of the `cier` tool; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cier::app
