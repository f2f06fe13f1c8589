#pragma once

#include <string>
#include <vector>

namespace balance {

/// Entry point of the `balance` executable. `args` excludes the program name.
/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run_cli(const std::vector<std::string>& args);

}  // namespace balance
