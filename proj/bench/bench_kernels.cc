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


// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mosaic/kernels.h"
#include "mosaic/maskcodec.h"
#include "mosaic/matrix.h"

namespace {

using mosaic::DocMask;
using mosaic::Matrix;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = n(rng);
  }
  return m;
}

std::vector<DocMask> random_masks(std::size_t count, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<DocMask> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<std::uint8_t> bits(d);
    for (auto& b : bits) b = coin(rng);
    out.push_back(mosaic::pack(bits));
  }
  return out;
}

template <Matrix (*Fn)(const Matrix&, const Matrix&)>
void BM_LowRankProduct(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const Matrix b = random_matrix(d, 8, 1), a = random_matrix(8, d, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(b, a));
}

template <void (*Fn)(Matrix&, const Matrix&, const Matrix&, const DocMask&, double)>
void BM_MaskedAccumulate(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const Matrix b = random_matrix(d, 8, 1), a = random_matrix(8, d, 2);
  const DocMask mask = random_masks(1, d, 3).front();
  Matrix out(d, d);
  for (auto _ : state) {
    Fn(out, b, a, mask, 0.5);
    benchmark::ClobberMemory();
  }
}

template <void (*Fn)(const Matrix&, std::span<const double>, std::span<double>)>
void BM_TransposedMatvec(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix m = random_matrix(n, n, 4);
  std::vector<double> x(n, 1.0), y(n);
  for (auto _ : state) {
    Fn(m, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

template <std::vector<std::size_t> (*Fn)(std::span<const DocMask>)>
void BM_PairwiseDots(benchmark::State& state) {
  const auto masks = random_masks(static_cast<std::size_t>(state.range(0)), 256, 5);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(masks));
}

namespace serial = mosaic::kernels::serial;
namespace omp = mosaic::kernels::omp;

BENCHMARK(BM_LowRankProduct<serial::low_rank_product>)->Name("low_rank_product/serial")->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_LowRankProduct<omp::low_rank_product>)->Name("low_rank_product/omp")->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_MaskedAccumulate<serial::accumulate_masked_product>)->Name("masked_accumulate/serial")->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_MaskedAccumulate<omp::accumulate_masked_product>)->Name("masked_accumulate/omp")->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_TransposedMatvec<serial::transposed_matvec>)->Name("transposed_matvec/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_TransposedMatvec<omp::transposed_matvec>)->Name("transposed_matvec/omp")->Arg(256)->Arg(1024);
BENCHMARK(BM_PairwiseDots<serial::pairwise_dots>)->Name("pairwise_dots/serial")->Arg(64)->Arg(512);
BENCHMARK(BM_PairwiseDots<omp::pairwise_dots>)->Name("pairwise_dots/omp")->Arg(64)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
