#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tabscout/config.hpp"

namespace tabscout::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (args[0] is the program name). Machine-readable
/// output goes to `out`, summaries and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const EnvLookup& env = process_env);

} // namespace tabscout::cli
