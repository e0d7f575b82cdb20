#pragma once

#include <cstddef>
#include <functional>

namespace invhull {

// Worker count used by the parallel sections of the engines. Initialized
// from INVHULL_WORKERS (default 1); the CLI may override it.
int worker_count();
void set_worker_count(int workers);

// Runs body(i) for i in [0, count) on up to worker_count() threads. Callers
// write results into per-index slots and reduce in index order, so results
// do not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace invhull
