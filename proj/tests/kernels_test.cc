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


#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "mosaic/errors.h"
#include "mosaic/kernels.h"
#include "oracles.h"

namespace mosaic {
namespace {

namespace ks = kernels::serial;
namespace ko = kernels::omp;

// The parallel kernels split work by output row or column only, so every
// output element is reduced in the same order as the serial reference and
// results must agree bit for bit.
TEST(Kernels, LowRankProductIsBitIdentical) {
  std::mt19937_64 rng(1);
  for (std::size_t d : {1u, 7u, 64u, 130u}) {
    for (std::size_t r : {1u, 4u}) {
      if (r > d) continue;
      const AdapterPair ad = oracle::random_adapter(d, r, rng);
      const Matrix s = ks::low_rank_product(ad.b, ad.a);
      EXPECT_EQ(s, ko::low_rank_product(ad.b, ad.a));
      EXPECT_LT(oracle::rel_frobenius(s, oracle::matmul(oracle::to_dense(ad.b),
                                                        oracle::to_dense(ad.a))),
                1e-14);
    }
  }
}

TEST(Kernels, AccumulateMaskedProductIsBitIdentical) {
  std::mt19937_64 rng(2);
  for (std::size_t d : {3u, 33u, 96u}) {
    Matrix out_s = oracle::random_matrix(d, d, rng);
    Matrix out_o = out_s;
    for (int rep = 0; rep < 4; ++rep) {
      const AdapterPair ad = oracle::random_adapter(d, 3, rng);
      const DocMask m = oracle::random_mask(d, rng);
      ks::accumulate_masked_product(out_s, ad.b, ad.a, m, 0.25 + rep);
      ko::accumulate_masked_product(out_o, ad.b, ad.a, m, 0.25 + rep);
    }
    EXPECT_EQ(out_s, out_o);
  }
}

TEST(Kernels, TransposedMatvecIsBitIdentical) {
  std::mt19937_64 rng(3);
  const Matrix m = oracle::random_matrix(64, 300, rng);
  std::vector<double> x(64), ys(300), yo(300);
  for (double& v : x) v = std::normal_distribution<double>()(rng);
  ks::transposed_matvec(m, x, ys);
  ko::transposed_matvec(m, x, yo);
  EXPECT_EQ(ys, yo);
  for (std::size_t c = 0; c < 300; c += 37) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 64; ++i) acc += m(i, c) * x[i];
    EXPECT_NEAR(ys[c], acc, 1e-12);
  }
}

TEST(Kernels, PairwiseDotsAgreeWithOracle) {
  std::mt19937_64 rng(4);
  std::vector<DocMask> masks;
  for (int i = 0; i < 25; ++i) masks.push_back(oracle::random_mask(77, rng));
  const auto s = ks::pairwise_dots(masks);
  EXPECT_EQ(s, ko::pairwise_dots(masks));
  for (std::size_t i = 0; i < masks.size(); ++i) {
    for (std::size_t j = 0; j < masks.size(); ++j) {
      EXPECT_EQ(s[i * masks.size() + j], oracle::dot(masks[i], masks[j]));
    }
  }
}

TEST(Kernels, ShapeChecks) {
  Matrix out(4, 4);
  EXPECT_THROW(ks::low_rank_product(Matrix(4, 2), Matrix(3, 4)), ShapeError);
  EXPECT_THROW(ko::low_rank_product(Matrix(4, 2), Matrix(3, 4)), ShapeError);
  EXPECT_THROW(ko::accumulate_masked_product(out, Matrix(4, 2), Matrix(2, 4),
                                             DocMask::full(5), 1.0),
               ShapeError);
  std::vector<DocMask> mixed{DocMask::full(3), DocMask::full(4)};
  EXPECT_THROW(ko::pairwise_dots(mixed), ArgumentError);
  EXPECT_THROW(ks::pairwise_dots(mixed), ArgumentError);
}

}  // namespace
}  // namespace mosaic
