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

namespace requ_gap {

/// Worker count: hardware concurrency, capped by REQU_GAP_THREADS when set.
inline std::size_t worker_count() {
  std::size_t n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("REQU_GAP_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
    } catch (const std::exception&) {
    }
  }
  return n;
}

/// Calls f(i) for i in [0, count) on up to worker_count() threads. Callers
/// write results into per-index slots, so output never depends on scheduling.
/// The first exception thrown by any call is rethrown.
template <class F>
void parallel_for(std::size_t count, F&& f) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  for (std::size_t t = 0; t + 1 < workers; ++t) threads.emplace_back(run);
  run();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace requ_gap
