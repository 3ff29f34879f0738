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

#ifndef MOSAIC_KERNELS_H_
#define MOSAIC_KERNELS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "mosaic/maskcodec.h"
#include "mosaic/matrix.h"

// Inner loops shared by the adapter algebra, the toy model and the server.
//
// Each kernel exists twice with identical signatures: `serial` is the plain
// reference, `omp` splits the outermost output loop across OpenMP threads.
// Both visit the reduction index of every output element in the same order,
// so their results are bit-identical; the test suite checks exactly that.
// Library code calls the `omp` versions.
namespace mosaic::kernels {

namespace serial {

// b (d x r) times a (r x d).
Matrix low_rank_product(const Matrix& b, const Matrix& a);

// out += scale * ((mask o b) a), rows with a clear mask bit untouched.
void accumulate_masked_product(Matrix& out, const Matrix& b, const Matrix& a,
                               const DocMask& mask, double scale);

// y = m^T x, with m of shape (n x k), x of length n, y of length k.
void transposed_matvec(const Matrix& m, std::span<const double> x,
                       std::span<double> y);

// Row-major n x n matrix of |m_i AND m_j|.
std::vector<std::size_t> pairwise_dots(std::span<const DocMask> masks);

}  // namespace serial

namespace omp {

Matrix low_rank_product(const Matrix& b, const Matrix& a);
void accumulate_masked_product(Matrix& out, const Matrix& b, const Matrix& a,
                               const DocMask& mask, double scale);
void transposed_matvec(const Matrix& m, std::span<const double> x,
                       std::span<double> y);
std::vector<std::size_t> pairwise_dots(std::span<const DocMask> masks);

}  // namespace omp

}  // namespace mosaic::kernels

#endif  // MOSAIC_KERNELS_H_
