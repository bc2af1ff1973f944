#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace swingmc::par {

// Process-wide worker count. 0 means "use hardware concurrency".
void set_workers(int n);
int workers();

// Runs fn(i) for i in [0, n). Work is handed out in fixed-size blocks via an
// atomic cursor, so load balancing is dynamic but the set of blocks does not
// depend on the worker count. Callers must keep writes disjoint per index if
// they want thread-count-independent results.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

// Chunked variant: fn(chunk_index, begin, end) with a fixed chunk size, so a
// per-chunk reduction followed by an ordered fold is bitwise reproducible for
// any worker count.
void parallel_chunks(std::int64_t n, std::int64_t chunk,
                     const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& fn);

}  // namespace swingmc::par
