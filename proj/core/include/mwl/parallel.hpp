#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace mwl {

/// Worker count used by the data-parallel loops. Results never depend on it.
void set_thread_count(unsigned n);
unsigned thread_count();

namespace detail {
/// Set inside worker threads; nested parallel loops then run serially.
inline thread_local bool in_worker = false;
}  // namespace detail

/// Runs body(begin, end, worker) over contiguous chunks of [0, n).
/// Chunk boundaries depend on the worker count, so callers must only
/// combine per-chunk results with order-independent operations (max, min)
/// or write disjoint output slots.
template <class Body>
void parallel_chunks(std::size_t n, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n == 0 ? 1 : n);
  if (workers <= 1 || detail::in_worker) {
    body(std::size_t{0}, n, 0u);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = n * w / workers;
    const std::size_t hi = n * (w + 1) / workers;
    pool.emplace_back([&body, lo, hi, w] {
      detail::in_worker = true;
      body(lo, hi, static_cast<unsigned>(w));
    });
  }
  for (auto& t : pool) t.join();
}

/// Calls body(i) for every i in [0, n); each index must write only its own output.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  parallel_chunks(n, [&body](std::size_t lo, std::size_t hi, unsigned) {
    for (std::size_t i = lo; i < hi; ++i) body(i);
  });
}

}  // namespace mwl
