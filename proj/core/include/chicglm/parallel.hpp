#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace chicglm {

// Static block partition of [0, count) over `threads` workers.  Each worker
// owns a contiguous index range, so writes to per-index slots never race and
// results are identical for any thread count.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t, std::size_t, int)>& body) {
  if (threads < 1) threads = 1;
  const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(threads), std::max<std::size_t>(count, 1));
  if (nthreads <= 1 || count == 0) {
    body(0, count, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t chunk = (count + nthreads - 1) / nthreads;
  for (std::size_t t = 0; t < nthreads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end, t] {
      try {
        body(begin, end, static_cast<int>(t));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace chicglm
