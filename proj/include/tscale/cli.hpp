#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tscale::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 1;
inline constexpr int exit_io = 2;

// Subcommands: size, flops, scale, grid, plan, verify, ingest, report.
// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tscale::cli
