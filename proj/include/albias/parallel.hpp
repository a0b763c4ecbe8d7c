#pragma once

#include <cstddef>
#include <functional>

namespace albias {

/// Worker cap: ALBIAS_THREADS when set to a positive integer, else the hardware count.
std::size_t thread_budget();

/// Calls body(i) for every i in [0, n), split into contiguous blocks across at most
/// thread_budget() threads. Each index is visited exactly once; results must be
/// written to per-index slots so the outcome never depends on scheduling. A call made
/// from inside a worker runs sequentially on that worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace albias
