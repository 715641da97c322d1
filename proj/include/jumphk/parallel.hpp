#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace jumphk {

// Runs fn(i) for i in [0, n) across `workers` threads. Each index must write
// only to its own output slot; reductions happen afterwards in index order, so
// results are byte-identical for any worker count.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers < 1) workers = 1;
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto body = [&]() {
    const std::size_t chunk = std::max<std::size_t>(1, n / (16 * static_cast<std::size_t>(workers)));
    for (;;) {
      std::size_t lo = next.fetch_add(chunk);
      if (lo >= n) return;
      std::size_t hi = std::min(n, lo + chunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace jumphk
