#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qfuel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDomain = 3;

const char* version();

// Runs the command line (without the program name). CSV goes to `out` unless
// --output is given; diagnostics go to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qfuel::cli
