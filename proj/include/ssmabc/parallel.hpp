#pragma once

#include <cstddef>
#include <functional>

namespace ssmabc {

/**
 * @brief Run body(i) for i in [0, n) on `threads` workers with a static
 * contiguous partition. The first exception (lowest index) is rethrown.
 */
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

/// Hardware concurrency, at least 1.
std::size_t default_thread_count();

}  // namespace ssmabc
