#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace envelope {

class TimeoutError : public std::runtime_error {
 public:
  TimeoutError() : std::runtime_error("analysis exceeded its time budget") {}
};

using Clock = std::chrono::steady_clock;

struct RunOptions {
  std::size_t jobs = 1;
  std::optional<Clock::time_point> deadline;

  static RunOptions with_timeout(std::chrono::milliseconds budget, std::size_t jobs = 1) {
    return {jobs, Clock::now() + budget};
  }

  void check_deadline() const {
    if (deadline && Clock::now() > *deadline) throw TimeoutError();
  }
};

/// Runs fn(i) for i in [0, n) on up to `jobs` threads with contiguous chunks.
/// The first exception thrown by any worker is rethrown on the caller.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> workers;
  const std::size_t chunk = (n + jobs - 1) / jobs;
  for (std::size_t w = 0; w < jobs; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace envelope
