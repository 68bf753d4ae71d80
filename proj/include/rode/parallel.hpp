#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace rode {

using Rng = std::mt19937_64;

/// Worker count: RODE_THREADS when set (>= 1), otherwise the hardware concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("RODE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// SplitMix64 finalizer; used to derive independent substreams from (seed, ids...).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  const std::uint64_t s = mix64(mix64(mix64(mix64(seed) ^ a) ^ (b + 0x632be59bd9b4e019ULL)) ^
                                (c + 0x85157af5ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return Rng(seq);
}

/// Runs body(i) for i in [0, n) across up to thread_count() workers.
///
/// Work is handed out by index, so any per-index result the body writes into
/// a caller-owned slot is independent of the number of threads. Callers reduce
/// those slots in index order to get bit-stable sums.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Pairwise (cascade) summation of a contiguous range.
template <class It>
double pairwise_sum(It first, It last) {
  const auto n = std::distance(first, last);
  if (n <= 8) {
    double s = 0.0;
    for (; first != last; ++first) s += *first;
    return s;
  }
  It mid = first + n / 2;
  return pairwise_sum(first, mid) + pairwise_sum(mid, last);
}

}  // namespace rode
