#pragma once

#include <cstddef>
#include <functional>

namespace autocrop {

/// Upper bound on worker threads used by parallel_for. Defaults to the
/// hardware concurrency; values < 1 are clamped to 1.
void set_thread_count(int n);
int thread_count();

/// Runs fn(i) for i in [0, n). Work is split into contiguous blocks, one per
/// thread, so results written to index-addressed slots are independent of the
/// thread count. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace autocrop
