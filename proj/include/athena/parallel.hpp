// Copyright 2026 The Athena Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Work partitioning with thread-count-independent results.
//
// Callers split work into a fixed number of tasks that does not depend on the
// thread count; workers only decide which thread runs which task. Any
// reduction happens afterwards in task order.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace athena::parallel {

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> threads{1};
  return threads;
}
}  // namespace detail

/// Worker cap used by every module. Defaults to 1.
inline unsigned threads() { return detail::thread_setting().load(); }
inline void set_threads(unsigned n) { detail::thread_setting().store(std::max(1u, n)); }

/// Runs fn(task) for task in [0, n_tasks). The exception of the
/// lowest-numbered failing task is rethrown.
template <typename Fn>
void for_each_task(std::size_t n_tasks, Fn&& fn, unsigned n_threads = threads()) {
  if (n_tasks == 0) return;
  const std::size_t workers = std::min<std::size_t>(n_threads, n_tasks);
  if (workers <= 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_task = n_tasks;
  std::exception_ptr error;
  auto work = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= n_tasks) return;
      try {
        fn(t);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (t < error_task) {
          error_task = t;
          error = std::current_exception();
        }
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(work);
    work();
  }
  if (error) std::rethrow_exception(error);
}

/// Number of fixed-size chunks covering n items.
inline std::size_t chunk_count(std::size_t n, std::size_t chunk) {
  return (n + chunk - 1) / chunk;
}

/// Pairwise (tree) summation; the association order depends only on the
/// input length.
template <typename T>
T pairwise_sum(std::span<const T> values) {
  if (values.size() <= 8) {
    T s = 0;
    for (T v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& values) {
  return pairwise_sum(std::span<const double>(values));
}

inline long double pairwise_sum(const std::vector<long double>& values) {
  return pairwise_sum(std::span<const long double>(values));
}

}  // namespace athena::parallel
