#include "ssmabc/parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace ssmabc {

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  threads = std::clamp<std::size_t>(threads, 1, n);
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    const std::size_t begin = n * w / threads;
    const std::size_t end = n * (w + 1) / threads;
    pool.emplace_back([&, w, begin, end] {
      for (std::size_t i = begin; i < end; ++i) {
        try {
          body(i);
        } catch (...) {
          errors[w] = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (std::size_t w = 0; w < threads; ++w) {
    if (errors[w]) std::rethrow_exception(errors[w]);
  }
}

std::size_t default_thread_count() { return std::max<std::size_t>(1, std::thread::hardware_concurrency()); }

}  // namespace ssmabc
