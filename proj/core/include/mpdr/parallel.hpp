#pragma once

#include <cstddef>
#include <functional>

namespace mpdr {

/// Worker count for parallel_for: the MPDR_THREADS environment variable when
/// set (a positive integer), otherwise the hardware concurrency.
std::size_t thread_budget();

/// Runs `fn(begin, end)` over a disjoint cover of [0, n) from multiple
/// threads. Ranges are contiguous and every index is visited exactly once,
/// so element-wise writes into preallocated storage come out identical for
/// any thread count. The first exception thrown by any worker is rethrown
/// after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace mpdr
