// Copyright 2026 The Authors.
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


#ifndef MOSAIC_SRC_PARALLEL_H_
#define MOSAIC_SRC_PARALLEL_H_

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace mosaic::internal {

// Runs fn(i) for i in [0, n) across OpenMP threads. Iterations must write
// only to their own slots, which makes the result independent of the
// schedule. The exception of the lowest failing index is rethrown on the
// calling thread.
inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic) if (n > 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mosaic::internal

#endif  // MOSAIC_SRC_PARALLEL_H_
