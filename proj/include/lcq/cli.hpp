#pragma once

#include <string>
#include <vector>

namespace lcq {

/// Runs one lab subcommand. args excludes the program name:
///   {subcommand, "--config", path, "--out", dir}.
/// Returns 0 on success, 2 on configuration/usage errors, 3 on numerical
/// failure.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace lcq
