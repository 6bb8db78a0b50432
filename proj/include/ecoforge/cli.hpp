#pragma once

#include <ostream>

namespace ecoforge::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kValidation = 2;
inline constexpr int kRuntime = 3;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ecoforge::cli
