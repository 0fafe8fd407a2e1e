#pragma once

// Minimal fork-join helper. Work is split into contiguous index chunks and
// every caller writes results into pre-sized slots, so output never depends
// on the worker count or on scheduling.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace rankcorr {

namespace detail {
inline std::atomic<std::size_t>& thread_setting() {
  static std::atomic<std::size_t> value{0};
  return value;
}
inline thread_local bool inside_worker = false;
}  // namespace detail

/// Caps the number of worker threads; 0 restores the hardware default.
inline void set_thread_count(std::size_t n) { detail::thread_setting() = n; }

inline std::size_t thread_count() {
  std::size_t n = detail::thread_setting();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Calls body(begin, end) over disjoint chunks of [0, count). Nested calls
/// from inside a worker run inline.
template <typename Body>
void parallel_chunks(std::size_t count, Body&& body, std::size_t min_chunk = 1) {
  if (count == 0) return;
  std::size_t workers = detail::inside_worker ? 1 : thread_count();
  workers = std::min(workers, (count + min_chunk - 1) / std::max<std::size_t>(min_chunk, 1));
  if (workers <= 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t step = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * step;
    const std::size_t end = std::min(count, begin + step);
    if (begin >= end) break;
    pool.emplace_back([&, w, begin, end] {
      detail::inside_worker = true;
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
  parallel_chunks(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) body(i);
  });
}

}  // namespace rankcorr
