#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace lulc {

// Runs fn(i) for every i in [0, count) using contiguous index chunks over at
// most `threads` workers. Items must be independent and must not depend on
// the schedule; under that contract results are identical for every thread
// count, which is what the seeded pipelines rely on. The first exception is
// rethrown on the caller thread.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  std::size_t workers = threads > 1 ? std::size_t(threads) : 1;
  if (workers > count) workers = count;
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t wi = 0; wi < workers; ++wi) {
    const std::size_t lo = wi * chunk;
    const std::size_t hi = lo + chunk < count ? lo + chunk : count;
    pool.emplace_back([&, wi, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[wi] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace lulc
