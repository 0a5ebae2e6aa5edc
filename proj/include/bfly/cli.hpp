#pragma once

#include <ostream>

namespace bfly {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;         // bad flags, domains, or input files
inline constexpr int kExitPrecondition = 3;  // valid flags, unroutable request
inline constexpr int kExitVerification = 4;  // a checked property failed
inline constexpr int kExitInternal = 7;

/// Default seed used by every randomized subcommand when --seed is absent.
inline constexpr unsigned long long kDefaultSeed = 1729;

/// Runs the command line tool; output on `out`, diagnostics on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace bfly
