#pragma once

#include <cstddef>
#include <functional>

namespace dblend {

/// Number of worker threads used by parallel_for. Defaults to the hardware
/// concurrency; override via set_worker_count or the DRIFTBLEND_WORKERS
/// environment variable. Results never depend on the worker count.
int worker_count();
void set_worker_count(int n);

/// Runs fn(begin, end) over disjoint chunks of [0, n). fn must be safe to
/// invoke concurrently on disjoint ranges. Exceptions from workers are
/// rethrown on the calling thread.
void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn);

}  // namespace dblend
