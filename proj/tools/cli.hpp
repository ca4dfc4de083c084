#pragma once

#include <ostream>

namespace pfv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCheckFailed = 2;

// Entry point of the pfv tool. Diagnostics go to `err`, progress to `log`.
int run(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

}  // namespace pfv::cli
