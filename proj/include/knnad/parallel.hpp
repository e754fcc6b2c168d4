#pragma once

#include <cstddef>
#include <functional>

namespace knnad {

/// Worker count to use for `requested` (0 means hardware concurrency).
unsigned resolve_threads(unsigned requested) noexcept;

/// Splits [0, n) into contiguous chunks and runs `body(begin, end)` on up to
/// `threads` workers. Chunk boundaries depend only on n and the worker
/// count, and bodies must write disjoint outputs, so results never depend on
/// scheduling. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace knnad
