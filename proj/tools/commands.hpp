#pragma once

#include <iosfwd>

#include "run_config.hpp"

namespace stpen::cli {

/// Runs one subcommand. Results go to files under cfg.out and to `out`;
/// diagnostics to `err`. Throws UsageError for bad invocations and
/// stpen::Error (or std::exception) for runtime failures.
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace stpen::cli
