#pragma once

#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ergo {

// Worker count: ERGOSTAT_WORKERS if set, hardware concurrency otherwise.
inline int worker_count() {
  if (const char* env = std::getenv("ERGOSTAT_WORKERS")) {
    int v = std::atoi(env);
    if (v >= 1 && v <= 256) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? int(hc) : 1;
}

// Static block partition over [0, n); results must be written by index so
// the outcome is identical for every worker count.
inline void parallel_for_indexed(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(size_t(workers));
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int t = 0; t < workers; ++t) {
    long lo = long(n) * t / workers, hi = long(n) * (t + 1) / workers;
    pool.emplace_back([&, lo, hi]() {
      try {
        for (long i = lo; i < hi; ++i) fn(int(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ergo
