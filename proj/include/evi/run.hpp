#pragma once

#include "evi/runconfig.hpp"

#include <iosfwd>

namespace evi {

/// Execute the configured command. Every artifact is assembled in memory
/// first, then written below cfg.out_dir through a temp file and rename, so
/// failed runs leave no partial outputs. A short summary goes to `out`.
/// Returns the process exit code: 0 success, 2 invalid configuration,
/// 3 solver failure.
int run_command(const RunConfig& cfg, std::ostream& out);

} // namespace evi
