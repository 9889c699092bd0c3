#pragma once

#include <cstddef>
#include <functional>

namespace fedmon {

// Runs fn(0..n-1) on up to `threads` threads (1 = inline). Each index runs
// exactly once; the first exception thrown is rethrown after all threads join.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace fedmon
