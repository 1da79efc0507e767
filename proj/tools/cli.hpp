#pragma once

#include <string>
#include <vector>

namespace attrmtl::cli {

// Front-end for the attrmtl binary. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 solver error.
int run(int argc, const char* const* argv);

// Same, for tests: args without the program name.
int run(const std::vector<std::string>& args);

}  // namespace attrmtl::cli
