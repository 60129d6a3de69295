#pragma once

#include <iosfwd>

namespace threadrank::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `threadrank` tool. Normal output goes to `out`, usage
/// errors and failures to `err`; warnings are logged through spdlog.
int run(int argc, char const *const *argv, std::ostream &out, std::ostream &err);

}  // namespace threadrank::cli
