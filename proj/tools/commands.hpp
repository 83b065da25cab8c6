#pragma once

// Subcommands of the drivestat tool, callable in-process so tests can drive
// them without spawning a shell.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace drivestat::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kAnalyticFailure = 3 };

inline constexpr std::string_view kToolVersion = DRIVESTAT_VERSION;
inline constexpr std::string_view kSchema = "drivestat.report/1";

/// Parses `args` (without the program name) and runs the chosen subcommand.
/// JSON or CSV aimed at "-" goes to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace drivestat::cli
