#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rrm {

/// Runs the command line given argv-style arguments (without the program
/// name). Returns the process exit code: 0 success, 2 precondition
/// violation, 3 numerical failure. Errors are reported as JSON on err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rrm
