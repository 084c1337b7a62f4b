#pragma once

#include <iosfwd>

namespace mixmate {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

// Entry point of the mixmate executable: init | train | eval | sweep-lambda | sample.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mixmate
