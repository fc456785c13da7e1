#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rqshot {

/// Calls fn(i) for i in [0, n) on up to `jobs` threads and returns the results
/// in index order. The first exception thrown by any call is rethrown.
template <class Fn> auto parallel_map(int n, int jobs, Fn fn) {
  using R = decltype(fn(0));
  std::vector<R> out(static_cast<std::size_t>(std::max(n, 0)));
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        out[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(jobs, n); ++t) pool.emplace_back(worker);
  for (auto &t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

} // namespace rqshot
