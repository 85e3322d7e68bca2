#pragma once

#include <string>
#include <vector>

namespace etd {

/// Command-line entry point, split out from main() so tests can drive it.
/// `args` excludes the program name. Returns the process exit code:
/// 0 success, 1 failed or missing inputs, 2 usage errors.
int run_cli(const std::vector<std::string>& args);

}  // namespace etd
