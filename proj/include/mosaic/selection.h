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

#ifndef MOSAIC_SELECTION_H_
#define MOSAIC_SELECTION_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mosaic/maskcodec.h"
#include "mosaic/matrix.h"

namespace mosaic {

struct SelectionConfig {
  std::size_t k_prime = 3;
  double lambda_ol = 1.0;
  double tau = 0.0;

  void validate() const;
};

struct SelectionCandidate {
  double score = 0.0;
  DocMask mask;
};

// <m1, m2> / d.
double overlap(const DocMask& m1, const DocMask& m2);

// sum_{i in S} s_i / k' - 2 lambda_ol sum_{i<j in S} overlap / (k'(k'-1)),
// with the pairwise term taken as 0 when k' = 1 or |S| = 1.
double objective(std::span<const std::size_t> subset,
                 std::span<const SelectionCandidate> candidates,
                 const SelectionConfig& cfg);

// Repeatedly adds the eligible (s > tau) candidate with the largest gain
// s_i - lambda_ol * mean_{j in S} overlap(i, j); the first pick uses s_i.
// Returns picks in order; stops at k' picks or when nothing eligible remains.
std::vector<std::size_t> greedy_select(
    std::span<const SelectionCandidate> candidates, const SelectionConfig& cfg);

// Exact maximizer over all size-min(k', #eligible) subsets of the eligible
// candidates; ascending indices, lexicographically smallest among optima.
// CapacityError when more than kMaxBruteForce candidates are given.
inline constexpr std::size_t kMaxBruteForce = 20;
std::vector<std::size_t> brute_force_select(
    std::span<const SelectionCandidate> candidates, const SelectionConfig& cfg);

// Weighted subgraph selection on a complete graph:
// W(S) = sum_{v in S} a_v - sum_{u<v in S} b_uv over |S| = k.
struct WssInstance {
  std::vector<double> vertex_weights;
  Matrix edge_weights;  // symmetric, zero diagonal
  std::size_t k = 0;

  void validate() const;
};

struct Graph {
  std::size_t n = 0;
  std::vector<std::uint8_t> adjacency;  // n x n, symmetric

  explicit Graph(std::size_t vertices = 0)
      : n(vertices), adjacency(vertices * vertices, 0) {}
  bool edge(std::size_t u, std::size_t v) const { return adjacency[u * n + v]; }
  void connect(std::size_t u, std::size_t v) {
    adjacency[u * n + v] = adjacency[v * n + u] = 1;
  }
};

// a_v = 1, b_uv = 0 on edges and big_b on non-edges, k = q.
// ArgumentError unless big_b > q and q <= n.
WssInstance clique_to_wss(const Graph& graph, std::size_t q, double big_b);

double wss_value(const WssInstance& inst, std::span<const std::size_t> subset);

struct WssOptimum {
  double value = 0.0;
  std::vector<std::size_t> subset;
};
// Exhaustive; CapacityError beyond kMaxBruteForce vertices.
WssOptimum wss_maximize(const WssInstance& inst);

// The selection objective written as a WSS instance:
// a_v = s_v / k', b_uv = 2 lambda_ol overlap(u, v) / (k'(k'-1)).
WssInstance selection_as_wss(std::span<const SelectionCandidate> candidates,
                             const SelectionConfig& cfg);

}  // namespace mosaic

#endif  // MOSAIC_SELECTION_H_
