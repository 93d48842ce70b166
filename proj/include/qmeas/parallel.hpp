#pragma once

// Minimal fixed-size worker pool for independent jobs. Results are written by index, so output
// order never depends on scheduling.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qmeas {

/// Number of workers used by parallel_for when none is given.
inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Calls job(i) for i in [0, count) on up to `workers` threads. The first exception thrown by any
/// job is rethrown after every worker has joined.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job, unsigned workers = 0) {
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// parallel_for collecting one result per index.
template <typename T>
std::vector<T> parallel_map(std::size_t count, const std::function<T(std::size_t)>& job, unsigned workers = 0) {
  std::vector<T> out(count);
  parallel_for(count, [&](std::size_t i) { out[i] = job(i); }, workers);
  return out;
}

}  // namespace qmeas
