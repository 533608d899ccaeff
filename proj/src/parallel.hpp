#pragma once

#include <cstddef>
#include <functional>

namespace wdmix::detail {

/// Worker cap: WDMIX_THREADS when set to a positive integer, otherwise the
/// hardware concurrency.
unsigned worker_count();

/// Calls body(begin, end) over a partition of [0, n). Chunks are disjoint so
/// bodies writing to per-index slots need no synchronisation. Small ranges run
/// inline on the caller's thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 4096);

}  // namespace wdmix::detail
