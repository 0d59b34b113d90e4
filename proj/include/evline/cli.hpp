#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace evline {

// Entry point for `evline gen|run|eval|viz|bench`. Returns the process exit code:
// 0 on success, 2 on usage, parse or I/O errors.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace evline
