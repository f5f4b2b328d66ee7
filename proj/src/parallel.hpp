#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace coevo::detail {

inline int resolve_threads(int requested, std::int64_t work_items) {
  int threads = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(threads, 1);
  return static_cast<int>(std::min<std::int64_t>(threads, std::max<std::int64_t>(work_items, 1)));
}

// Calls body(begin, end, worker) on contiguous chunks of [0, count). The
// first exception thrown by any worker is rethrown on the caller's thread.
template <typename Body>
void parallel_chunks(std::int64_t count, int threads, Body&& body) {
  threads = resolve_threads(threads, count);
  if (threads == 1) {
    body(std::int64_t{0}, count, 0);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  const std::int64_t chunk = (count + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    const std::int64_t begin = std::min(count, w * chunk);
    const std::int64_t end = std::min(count, begin + chunk);
    pool.emplace_back([&, begin, end, w] {
      try {
        body(begin, end, w);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace coevo::detail
