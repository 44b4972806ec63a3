#pragma once

#include <cstddef>
#include <functional>

namespace epred {

/// Number of worker threads used by site loops. Initialised from the
/// EPRED_THREADS environment variable (default 1).
int thread_count();
void set_thread_count(int n);

/// Runs body(i) for i in [0, n). Iterations must write disjoint outputs;
/// the result never depends on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace epred
