#pragma once

#include <cstddef>
#include <functional>

namespace adams {

/// Runs body(i) for i in [0, n) on up to `threads` workers with static contiguous chunking.
/// Each index is processed exactly once; callers write results by index, so output does not
/// depend on the thread count. threads == 0 means hardware concurrency.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

unsigned resolve_threads(unsigned requested) noexcept;

}  // namespace adams
