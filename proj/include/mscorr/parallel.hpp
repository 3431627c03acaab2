#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mscorr {

/// Runs body(i) for i in [0, n) over a fixed pool of threads. Each index is
/// processed by exactly one call, so results written per index do not depend
/// on the thread count. The first exception thrown by any call is rethrown
/// (lowest index wins, to keep error messages reproducible).
template <typename Body>
void parallel_for(std::size_t n, Body&& body, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::mutex mu;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  auto worker = [&](unsigned w) {
    // Strided assignment balances triangular workloads (e.g. pair loops).
    for (std::size_t i = w; i < n; i += threads) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        return;
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(threads - 1);
  for (unsigned w = 1; w < threads; ++w) pool.emplace_back(worker, w);
  worker(0);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace mscorr
