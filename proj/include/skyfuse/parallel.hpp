// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace skyfuse {

/// Run fn(i) for i in [0, count) on up to `threads` workers, contiguous
/// chunks per worker. fn must only touch state owned by index i, so the
/// result is identical for any thread count. If a worker throws, the
/// lowest-chunk exception is rethrown after all workers join.
template <typename Fn>
void parallel_for_index(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  const std::size_t chunk = (count + n_workers - 1) / n_workers;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n_workers);
  pool.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, w, &fn, &errors]() {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

}  // namespace skyfuse
