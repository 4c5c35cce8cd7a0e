#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cqt::cli {

/// Full command-line entry point, factored out of main() so tests can drive
/// it in-process. `args` excludes the program name. Returns the process exit
/// code: 0 success, 1 runtime/expect failure, 2 usage or parse error,
/// 3 protocol failure (probe not detected in a single-shot run).
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cqt::cli
