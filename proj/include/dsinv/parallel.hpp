#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace dsinv {

// Static block partition over [0, n). Results must be written to disjoint
// per-index slots so the outcome is identical for any worker count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn,
                  std::size_t min_serial = 2048) {
  if (threads <= 1 || n < min_serial) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn]() {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline int default_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace dsinv
