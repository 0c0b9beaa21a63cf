#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace sgame {

/// Global worker count for data-parallel loops (set once from the CLI).
int& worker_threads();

/// Runs fn(i) for i in [0, n). Work items must write to disjoint locations;
/// the split over threads is by contiguous blocks, so results do not depend
/// on the thread count.
template <typename Fn>
void parallel_for(long n, Fn&& fn) {
  const int threads = std::min<long>(worker_threads(), n);
  if (threads <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const long chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const long lo = t * chunk;
    const long hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (long i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace sgame
