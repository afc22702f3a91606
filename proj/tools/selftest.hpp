#pragma once

#include <ostream>

namespace qgan::cli {

/// Runs the invariant checks, printing one line per check. True when all pass.
bool run_selftest(std::ostream& out);

}  // namespace qgan::cli
