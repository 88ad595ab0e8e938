#pragma once

#include <cstddef>
#include <functional>

namespace detgeom {

// Worker count: DETGEOM_THREADS when set to a positive integer, otherwise
// std::thread::hardware_concurrency() (at least 1).
std::size_t worker_count();

// Calls fn(i) for every i in [0, count), split into contiguous blocks across
// worker_count() threads. fn must only write to per-index state. The first
// exception thrown by any block is rethrown after all threads join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace detgeom
