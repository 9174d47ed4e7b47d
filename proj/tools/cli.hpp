#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ca43::cli {

enum ExitCode : int { exit_ok = 0, exit_runtime = 1, exit_usage = 2 };

/// Runs one command line (args excludes the program name). Reports go to `out`,
/// diagnostics to `err`; CSV artifacts are written below --out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ca43::cli
