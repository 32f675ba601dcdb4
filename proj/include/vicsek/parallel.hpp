#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace vicsek {

// Default worker count: VICSEK_THREADS if set, else 1.
inline std::size_t& thread_setting() {
  static std::size_t n = [] {
    if (const char* s = std::getenv("VICSEK_THREADS")) {
      const long v = std::strtol(s, nullptr, 10);
      if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::size_t(1);
  }();
  return n;
}
inline std::size_t default_threads() { return thread_setting(); }
inline void set_default_threads(std::size_t n) { thread_setting() = std::max<std::size_t>(1, n); }

// Work is split into fixed-size chunks independent of the thread count, so any
// per-chunk partial results combined in chunk order are bit-stable.
inline constexpr std::size_t kChunk = 4096;

inline std::size_t chunk_count(std::size_t n, std::size_t chunk = kChunk) { return (n + chunk - 1) / chunk; }

// f(begin, end, chunk_index) for each chunk of [0, n).
template <class F>
void for_each_chunk(std::size_t n, F&& f, std::size_t chunk = kChunk, std::size_t threads = default_threads()) {
  const std::size_t chunks = chunk_count(n, chunk);
  threads = std::min(threads, chunks);
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) f(c * chunk, std::min(n, (c + 1) * chunk), c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    try {
      for (std::size_t c; (c = next.fetch_add(1)) < chunks;) f(c * chunk, std::min(n, (c + 1) * chunk), c);
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mu);
      if (!err) err = std::current_exception();
      next = chunks;
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

// f(i) for each i in [0, n); f must only write its own output slot.
template <class F>
void parallel_for(std::size_t n, F&& f, std::size_t chunk = 64, std::size_t threads = default_threads()) {
  for_each_chunk(
      n, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t i = b; i < e; ++i) f(i);
      },
      chunk, threads);
}

}  // namespace vicsek
