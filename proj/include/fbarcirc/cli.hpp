#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fbarcirc {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // numerical failure or failed gate
inline constexpr int kExitUsage = 2;    // usage, config or parse error

/// Runs one `fbarcirc` command. `args` excludes the program name. Human
/// output goes to `out` and ends with one machine-readable JSON line;
/// diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes `content` to `path` through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace fbarcirc
