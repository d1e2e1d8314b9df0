#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace resokit::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNoResonance = 2;
inline constexpr int kExitParse = 3;
inline constexpr int kExitFit = 4;  // non-convergence, unphysical result, degenerate data

/// Runs one command line. `args[0]` is the program name. Normal output goes to `out`;
/// failures write one JSON line {"error": {...}} to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace resokit::cli
