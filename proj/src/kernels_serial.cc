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

#include "mosaic/errors.h"
#include "mosaic/kernels.h"

namespace mosaic::kernels::serial {

Matrix low_rank_product(const Matrix& b, const Matrix& a) {
  if (b.cols() != a.rows()) throw ShapeError("low_rank_product: inner dims");
  const std::size_t rows = b.rows(), cols = a.cols(), rank = b.cols();
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
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
  const std::size_t rows = b.rows(), cols = a.cols(), rank = b.cols();
  for (std::size_t i = 0; i < rows; ++i) {
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
  const std::size_t n = m.rows(), k = m.cols();
  for (std::size_t c = 0; c < k; ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += m(i, c) * x[i];
    y[c] = acc;
  }
}

std::vector<std::size_t> pairwise_dots(std::span<const DocMask> masks) {
  const std::size_t n = masks.size();
  std::vector<std::size_t> out(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (masks[i].d() != masks[j].d()) {
        throw ArgumentError("pairwise_dots: mask lengths differ");
      }
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

}  // namespace mosaic::kernels::serial
