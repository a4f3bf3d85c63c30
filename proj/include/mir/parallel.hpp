#pragma once

#include <cstddef>
#include <functional>

namespace mir {

// Worker count: MIR_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
int default_thread_count();

// Runs body(0..count-1) on up to `threads` workers (0 = default_thread_count()).
// Indices are handed out dynamically; the first exception thrown by a body is
// rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace mir
