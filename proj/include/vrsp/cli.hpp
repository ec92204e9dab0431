// Command-line entry point. Exit codes: 0 success, 1 runtime error, 2 usage error.
#pragma once

#include <string>
#include <vector>

namespace vrsp {

int run_cli(int argc, const char* const* argv);

/// Convenience overload; args excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace vrsp
