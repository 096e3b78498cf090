#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fraudlab {

// Worker cap: FRAUDLAB_THREADS if set, else hardware concurrency.
inline int max_workers() {
  if (const char* env = std::getenv("FRAUDLAB_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs all jobs to completion over at most max_workers() threads. Each job
// writes only its own outputs, so the result is schedule-independent.
inline void run_jobs(std::vector<std::function<void()>> jobs,
                     int thread_cap = 0) {
  int workers = thread_cap > 0 ? thread_cap : max_workers();
  workers = std::min<int>(workers, static_cast<int>(jobs.size()));
  if (workers <= 1) {
    for (auto& job : jobs) job();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mtx;
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        jobs[i]();
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mtx);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fraudlab
