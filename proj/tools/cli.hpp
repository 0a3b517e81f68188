#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace dynroute::cli {

/// Process exit codes. Stable; documented in the README.
enum class ExitCode : int {
    Ok = 0,
    Internal = 1,
    Usage = 2,
    InvalidScenario = 3,
    Unreachable = 4,
    Stranded = 5,
    SuiteConfig = 6,
    Io = 7,
};

/// Runs the command line with the given arguments (argv[0] included).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace dynroute::cli
