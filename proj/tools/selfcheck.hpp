#pragma once

#include <ostream>

namespace bridgelab::tools {

// Runs the built-in oracle checks and prints one line per check.
// Returns the number of failed checks.
int run_selfcheck(std::ostream& out);

}  // namespace bridgelab::tools
