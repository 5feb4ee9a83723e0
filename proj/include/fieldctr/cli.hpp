#pragma once

#include <string>
#include <vector>

namespace fieldctr {

// Runs one CLI invocation ("train --config run.ini ...") and returns the
// process exit code. Kept out of main() so tests can drive it directly.
int run_cli(const std::vector<std::string>& args);

}  // namespace fieldctr
