#pragma once

namespace dupviper {

// Exit codes: 0 success, 1 internal failure, 2 usage or parameter error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

int run_cli(int argc, char** argv);

}  // namespace dupviper
