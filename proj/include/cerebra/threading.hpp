#pragma once

// Minimal data-parallel helper for element-local work. Partitioning is by
// contiguous index ranges; callers that reduce must combine per-thread
// buffers in thread order so a fixed thread count is bitwise reproducible.

#include <algorithm>
#include <thread>
#include <vector>

namespace cerebra {

inline int effective_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// fn(begin, end, chunk_index); chunks are contiguous and ordered.
template <class Fn>
void parallel_chunks(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads <= 1 || n < 256) {
    if (n > 0) fn(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int b = t * chunk, e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e, t] { fn(b, e, t); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace cerebra
