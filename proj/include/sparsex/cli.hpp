#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sparsex {

/// Exit statuses of run_cli.
enum ExitCode : int {
    exit_ok = 0,
    exit_bound_failed = 1,
    exit_usage = 2,
    exit_resource = 3,
    exit_construction = 4,
    exit_internal = 5,
};

/// Environment variable that, when set, prefixes relative --out paths.
inline constexpr const char* out_dir_env = "SPARSEX_OUT_DIR";

/// Runs one subcommand. `args` excludes the program name. Reports go to
/// --out when given, otherwise to `out`; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sparsex
