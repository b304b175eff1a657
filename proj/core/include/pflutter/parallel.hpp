#pragma once

#include <functional>

namespace pflutter {

/// Worker count from PFLUTTER_THREADS, else hardware concurrency (>= 1).
int thread_count();

/// Runs fn(i) for i in [0, n). Work items must write disjoint outputs.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace pflutter
