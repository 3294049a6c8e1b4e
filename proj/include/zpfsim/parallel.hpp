/*
   Copyright 2026 The zpfsim Authors

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

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace zpfsim::parallel {

/// Block size used by every Monte Carlo loop. Partial results are kept per
/// block and reduced in block order, so the reduction tree (and therefore
/// the floating-point result) does not depend on the thread count.
inline constexpr std::size_t kBlockSize = 4096;

inline std::size_t block_count(std::size_t n, std::size_t block = kBlockSize) {
  return (n + block - 1) / block;
}

/// Calls fn(block_index, begin, end) for every block of [0, n). Blocks are
/// handed out dynamically; fn must only write to its own block's slot.
template <class Fn>
void for_each_block(std::size_t n, unsigned threads, Fn&& fn,
                    std::size_t block = kBlockSize) {
  const std::size_t blocks = block_count(n, block);
  if (blocks == 0) return;
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), blocks));
  if (workers == 1) {
    for (std::size_t b = 0; b < blocks; ++b)
      fn(b, b * block, std::min(n, (b + 1) * block));
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        fn(b, b * block, std::min(n, (b + 1) * block));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(blocks);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Runs fn(i) for i in [0, n) with one task per index (coarse work items such
/// as per-setting simulations). Results must be written to slot i.
template <class Fn>
void for_each_index(std::size_t n, unsigned threads, Fn&& fn) {
  for_each_block(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  }, 1);
}

}  // namespace zpfsim::parallel
