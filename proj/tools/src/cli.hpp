#pragma once

#include <iosfwd>

namespace cdae::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kConfig = 3;
inline constexpr int kData = 4;
inline constexpr int kNumeric = 5;
inline constexpr int kNoCategories = 6;
inline constexpr int kInternal = 1;

/// Parses argv, runs one subcommand, and maps failures to exit codes.
int run(int argc, char** argv);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace cdae::cli
