#pragma once

// facesim command-line entry point, callable in-process for tests.

#include <iosfwd>
#include <string>
#include <vector>

namespace facesim::cli {

/// Parses and runs one subcommand. Returns the process exit code; errors are
/// reported on `err` as "facesim: <kind> error: <message>".
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with argv[0] supplied.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace facesim::cli
