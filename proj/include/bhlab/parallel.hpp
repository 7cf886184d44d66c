/*
   Copyright 2026 The bhlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

/** @file parallel.hpp
    @brief Fan-out of independent trials over a fixed pool of threads.
*/

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bhlab {

/// 0 means one worker per hardware thread.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0)
    return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Evaluates f(i) for i in [0, n) and returns the results in index order.
/// Work is claimed dynamically, but slot i always holds f(i), so the output
/// does not depend on the thread count. The first exception thrown by any
/// task is rethrown after all workers stop.
template <class F>
auto map_trials(std::int64_t n, unsigned threads, F f)
    -> std::vector<decltype(f(std::int64_t{}))> {
  using R = decltype(f(std::int64_t{}));
  std::vector<R> out(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
  if (n <= 0)
    return out;
  const unsigned workers =
      std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(n));
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed))
        return;
      const std::int64_t i = next.fetch_add(1);
      if (i >= n)
        return;
      try {
        out[static_cast<std::size_t>(i)] = f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error)
          error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(work);
    for (auto &t : pool)
      t.join();
  }
  if (error)
    std::rethrow_exception(error);
  return out;
}

} // namespace bhlab
