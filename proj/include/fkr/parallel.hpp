#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace fkr {

// Resolves a requested thread count: 0 means "use the FKR_THREADS environment
// variable if set, otherwise the hardware concurrency".
inline unsigned resolve_threads(unsigned requested)
{
  if (requested > 0)
    return requested;
  if (const char* env = std::getenv("FKR_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0)
      return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks; each index
// must write only to its own output slot, so results do not depend on the
// number of threads.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& fn)
{
  const unsigned t = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (unsigned w = 0; w < t; ++w) {
    const std::size_t begin = n * w / t;
    const std::size_t end = n * (w + 1) / t;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i)
          fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error)
          error = std::current_exception();
      }
    });
  }
  for (auto& th : pool)
    th.join();
  if (error)
    std::rethrow_exception(error);
}

// Pairwise (cascade) summation; the result depends only on the order of the
// input, never on how it was produced.
inline double pairwise_sum(std::span<const double> v)
{
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v)
      s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

} // namespace fkr
