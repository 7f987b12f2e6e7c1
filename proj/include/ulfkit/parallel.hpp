#pragma once

#include <cstddef>
#include <functional>

namespace ulfkit {

// Worker count for embarrassingly parallel loops. 0 means "use ULFKIT_THREADS
// if set, otherwise 1".
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Calls body(i) for i in [0, n). Iterations must be independent; results are
// whatever body writes into per-index slots, so output order never depends on
// the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ulfkit
