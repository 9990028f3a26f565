#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace projlens {

// Entry point of the `projlens` tool. Reports go to files named by --out
// (or `out` for commands that print); failures are written to `err` as one
// JSON object per line and yield a non-zero exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Convenience overload; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace projlens
