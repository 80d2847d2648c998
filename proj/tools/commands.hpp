#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace relibat::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr std::uint64_t kDefaultSeed = 2022;

/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
enum ExitCode : int
{
    kSuccess = 0,
    kRuntimeFailure = 1,
    kUsageError = 2,
};

/**
 * Runs one command line (without the program name), e.g. {"exact", "bridge.net"}.
 * Subcommands: exact, estimate, generate, train, predict, replay.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

}  // namespace relibat::cli
