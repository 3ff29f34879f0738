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

#include <bit>
#include <cstdint>

#include "mosaic/errors.h"
#include "mosaic/kernels.h"

// Work below this many multiply-adds stays on the calling thread.
namespace {
constexpr std::int64_t kParallelThreshold = 1 << 14;
}

namespace mosaic::kernels::omp {

Matrix low_rank_product(const Matrix& b, const Matrix& a) {
  if (b.cols() != a.rows()) throw ShapeError("low_rank_product: inner dims");
  const std::int64_t rows = static_cast<std::int64_t>(b.rows());
  const std::size_t cols = a.cols(), rank = b.cols();
  Matrix out(b.rows(), cols);
#pragma omp parallel for schedule(static) \
    if (rows * static_cast<std::int64_t>(cols * rank) > kParallelThreshold)
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < rank; ++k) acc += b(i, k) * a(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

void accumulate_masked_product(Matrix& out, const Matrix& b, const Matrix& a,
                               const DocMask& mask, double scale) {
  if (b.cols() != a.rows() || out.rows() != b.rows() ||
      out.cols() != a.cols() || mask.d() != b.rows()) {
    throw ShapeError("accumulate_masked_product: shape mismatch");
  }
  const std::int64_t rows = static_cast<std::int64_t>(b.rows());
  const std::size_t cols = a.cols(), rank = b.cols();
#pragma omp parallel for schedule(static) \
    if (rows * static_cast<std::int64_t>(cols * rank) > kParallelThreshold)
  for (std::int64_t i = 0; i < rows; ++i) {
    if (!mask.test(i)) continue;
    for (std::size_t j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < rank; ++k) acc += b(i, k) * a(k, j);
      out(i, j) += scale * acc;
    }
  }
}

void transposed_matvec(const Matrix& m, std::span<const double> x,
                       std::span<double> y) {
  if (x.size() != m.rows() || y.size() != m.cols()) {
    throw ShapeError("transposed_matvec: shape mismatch");
  }
  const std::size_t n = m.rows();
  const std::int64_t k = static_cast<std::int64_t>(m.cols());
#pragma omp parallel for schedule(static) \
    if (k * static_cast<std::int64_t>(n) > kParallelThreshold)
  for (std::int64_t c = 0; c < k; ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += m(i, c) * x[i];
    y[c] = acc;
  }
}

std::vector<std::size_t> pairwise_dots(std::span<const DocMask> masks) {
  const std::int64_t n = static_cast<std::int64_t>(masks.size());
  for (const DocMask& m : masks) {
    if (m.d() != masks.front().d()) {
      throw ArgumentError("pairwise_dots: mask lengths differ");
    }
  }
  std::vector<std::size_t> out(masks.size() * masks.size(), 0);
  const std::int64_t bytes = n == 0 ? 0 : masks.front().packed().size();
#pragma omp parallel for schedule(static) if (n * n * bytes > kParallelThreshold)
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      auto a = masks[i].packed();
      auto b = masks[j].packed();
      std::size_t c = 0;
      for (std::size_t t = 0; t < a.size(); ++t) {
        c += std::popcount(static_cast<std::uint8_t>(a[t] & b[t]));
      }
      out[i * n + j] = c;
    }
  }
  return out;
}

}  // namespace mosaic::kernels::omp
