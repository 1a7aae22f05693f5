#pragma once

// Minimal deterministic work pool: a fixed index range is distributed to a
// handful of threads. Each item writes only its own output slot, so results
// are identical for any thread count; the first exception wins and is
// rethrown on the caller's thread after the pool drains.

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace sprintsim {

inline void parallel_for(int n, int threads, const std::function<void(int)>& work) {
  if (n < 0) throw std::invalid_argument("parallel_for: negative item count");
  if (n == 0) return;
  if (threads > n) threads = n;
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) work(i);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto drain = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        work(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(drain);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace sprintsim
