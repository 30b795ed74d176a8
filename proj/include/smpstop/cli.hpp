#pragma once

#include <string>
#include <vector>

namespace smpstop::cli {

// Runs one subcommand (solve | certify | simulate | oracle |
// check-equivalence). Exit codes: 0 success, 1 validation error, 2 numerical
// failure, 3 certification not achieved under --require-optimal.
int run(std::vector<std::string> args);

int run(int argc, char** argv);

}  // namespace smpstop::cli
