#pragma once

#include <iosfwd>

namespace pflutter {

/// Small-grid invariant suite used by `pflutter check`. Prints one line per
/// check and returns true when every check passes.
bool run_invariant_suite(std::ostream& os);

}  // namespace pflutter
