#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace favor::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitResource = 4;

// Entry point behind the `favorlab` binary. `args` excludes the program name.
// CSV goes to `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace favor::cli
