#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bcns {

// Global cap on worker threads (the CLI's --workers). 0 means hardware concurrency.
inline std::atomic<int>& worker_limit() {
  static std::atomic<int> limit{0};
  return limit;
}

inline int worker_count() {
  int w = worker_limit().load();
  if (w <= 0) w = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return w;
}

/// Runs f(i) for i in [0, n) on up to worker_count() threads. Results must be
/// written to per-index slots so the outcome is independent of scheduling.
/// The first exception is rethrown after all workers stop.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(worker_count()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (!err) err = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace bcns
