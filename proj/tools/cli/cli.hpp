#pragma once

#include <iosfwd>

namespace ghosttrack::cli {

/// Runs the command line in-process. Returns the process exit status: 0 on success,
/// 1 on runtime failure, 2 on usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ghosttrack::cli
