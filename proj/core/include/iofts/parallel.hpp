#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace iofts {

/// Worker count: IOFTS_WORKERS when set, else hardware concurrency.
inline int workerCount() {
  if (const char* env = std::getenv("IOFTS_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Run fn(0..n-1) on the worker pool; indices are claimed atomically, so
/// callers needing deterministic reduction must write into per-index slots
/// and reduce in index order afterwards.
inline void parallelFor(size_t n, const std::function<void(size_t)>& fn) {
  const int workers = workerCount();
  if (n < 2 || workers < 2) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  const int spawn = std::min<size_t>(static_cast<size_t>(workers), n) - 1;
  pool.reserve(static_cast<size_t>(spawn));
  for (int w = 0; w < spawn; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace iofts
