#pragma once

#include <iosfwd>

namespace fkr {

// Exit codes: 0 success, 1 config error, 2 runtime error, 3 acceptance failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitCheck = 3;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace fkr
