#pragma once

#include <cstddef>
#include <functional>

namespace bsgs {

/// Worker count: BSGS_THREADS if set (clamped to >= 1), else hardware
/// concurrency. Fixed for the lifetime of the process.
int thread_count();

/// Runs fn(begin, end) over a partition of [0, n). The partition is fixed by
/// n alone, so any reduction that merges per-chunk results in chunk order is
/// independent of the worker count.
void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn);

}  // namespace bsgs
