#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace morphseg::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kRuntimeError = 3,
};

/// Runs one command line (argv[0] is the program name). Results go to `out`,
/// the resolved configuration, progress and diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with the arguments after the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace morphseg::cli
