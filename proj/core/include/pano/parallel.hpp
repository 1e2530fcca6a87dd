#pragma once

#include <functional>

namespace pano {

/// Number of worker threads used by the parallel kernels. 0 selects the
/// hardware concurrency. Results never depend on this value.
void set_thread_count(int threads);
int thread_count();

/// Runs fn(i) for every i in [begin, end) using static contiguous chunks.
/// Each index is visited exactly once; fn must not touch shared mutable state
/// except through disjoint per-index slots.
void parallel_for(int begin, int end, const std::function<void(int)> &fn);

}  // namespace pano
