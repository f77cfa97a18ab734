#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace l2sp {

/// Run fn(r) for r in [0, count). Work is split into contiguous blocks over
/// at most `threads` workers; callers store per-index results and reduce
/// sequentially afterwards, so the outcome is independent of thread count.
inline void parallel_for_index(std::int64_t count, int threads,
                               const std::function<void(std::int64_t)>& fn) {
  if (count <= 0) return;
  int workers = threads;
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 1 || count == 1) {
    for (std::int64_t r = 0; r < count; ++r) fn(r);
    return;
  }
  workers = static_cast<int>(std::min<std::int64_t>(workers, count));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::int64_t block = (count + workers - 1) / workers;
  for (int t = 0; t < workers; ++t) {
    const std::int64_t lo = t * block;
    const std::int64_t hi = std::min<std::int64_t>(lo + block, count);
    pool.emplace_back([&, lo, hi, t] {
      try {
        for (std::int64_t r = lo; r < hi; ++r) fn(r);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace l2sp
