#pragma once

#include <cstddef>
#include <functional>

namespace pfv {

// Worker count for data-parallel kernels. Results do not depend on it:
// kernels partition output rows and reductions use fixed chunks.
void set_thread_count(int threads);
int thread_count();

// Calls body(begin, end) on contiguous slices of [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace pfv
