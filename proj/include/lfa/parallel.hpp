/*
 * Copyright 2026 The LFA Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LFA_PARALLEL_HPP_
#define LFA_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace lfa {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
// written by index; the exception of the lowest failing index is rethrown.
template <typename Fn>
void parallel_for(Eigen::Index n, int threads, Fn fn) {
  const auto workers = std::clamp<Eigen::Index>(threads, 1, std::max<Eigen::Index>(n, 1));
  if (workers == 1) {
    for (Eigen::Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<Eigen::Index> next{0};
  std::vector<std::thread> pool;
  for (Eigen::Index t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (Eigen::Index i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace lfa

#endif  // LFA_PARALLEL_HPP_
