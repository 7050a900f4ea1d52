#pragma once

#include <cstddef>
#include <functional>

namespace radialdlt {

/// Worker count: RADIALDLT_THREADS if set to a positive integer, otherwise
/// std::thread::hardware_concurrency().
int thread_count();

/// Overrides the worker count for the current process (0 restores the
/// environment/default behaviour). Mainly for tests.
void set_thread_count(int n);

/// Calls body(i) for i in [0, n). Indices are split into contiguous chunks,
/// one per worker; each body must only write state owned by its index.
/// Nested calls from inside a worker run inline.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace radialdlt
