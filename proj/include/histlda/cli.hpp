#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace histlda::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

/// Runs the `histlda` command line. args[0] is the program name. Errors are
/// reported as one JSON line on `err`; the return value is the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace histlda::cli
