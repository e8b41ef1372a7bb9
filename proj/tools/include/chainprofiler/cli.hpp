#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace chainprofiler::cli {

/// Runs one subcommand. `args` excludes the program name. Returns the process
/// exit code: 0 success, 1 I/O or data failure, 2 invalid invocation.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Version string recorded in every output sidecar.
const char* version();

}  // namespace chainprofiler::cli
