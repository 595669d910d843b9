#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace destructure::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInternal = 1;
inline constexpr int kParseError = 2;
inline constexpr int kNoCandidates = 3;
inline constexpr int kRemoteError = 4;
inline constexpr int kAllFailed = 5;

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace destructure::cli
