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

#include "mosaic/selection.h"

#include <algorithm>
#include <cmath>
#include <bit>
#include <string>

#include "mosaic/errors.h"
#include "mosaic/kernels.h"

namespace mosaic {

void SelectionConfig::validate() const {
  if (k_prime < 1) throw ArgumentError("selection: k' must be >= 1");
  if (!(lambda_ol >= 0.0)) throw ArgumentError("selection: lambda_ol < 0");
  if (std::isnan(tau)) throw ArgumentError("selection: tau is NaN");
}

double overlap(const DocMask& m1, const DocMask& m2) {
  if (m1.d() != m2.d()) throw ArgumentError("overlap: mask lengths differ");
  if (m1.d() == 0) return 0.0;
  return static_cast<double>(dot(m1, m2)) / static_cast<double>(m1.d());
}

double objective(std::span<const std::size_t> subset,
                 std::span<const SelectionCandidate> candidates,
                 const SelectionConfig& cfg) {
  cfg.validate();
  if (subset.empty()) throw ArgumentError("objective: empty subset");
  const double kp = static_cast<double>(cfg.k_prime);
  double relevance = 0.0;
  for (std::size_t i : subset) {
    if (i >= candidates.size()) throw ArgumentError("objective: bad index");
    relevance += candidates[i].score;
  }
  relevance /= kp;
  if (cfg.k_prime == 1 || subset.size() == 1) return relevance;
  double conflicts = 0.0;
  for (std::size_t a = 0; a < subset.size(); ++a) {
    for (std::size_t b = a + 1; b < subset.size(); ++b) {
      conflicts += overlap(candidates[subset[a]].mask, candidates[subset[b]].mask);
    }
  }
  return relevance - 2.0 * cfg.lambda_ol * conflicts / (kp * (kp - 1.0));
}

namespace {

std::vector<DocMask> masks_of(std::span<const SelectionCandidate> candidates) {
  std::vector<DocMask> masks;
  masks.reserve(candidates.size());
  for (const auto& c : candidates) masks.push_back(c.mask);
  return masks;
}

}  // namespace

std::vector<std::size_t> greedy_select(
    std::span<const SelectionCandidate> candidates, const SelectionConfig& cfg) {
  cfg.validate();
  const std::size_t n = candidates.size();
  std::vector<std::size_t> picked;
  if (n == 0) return picked;
  const std::vector<DocMask> masks = masks_of(candidates);
  const std::vector<std::size_t> dots = kernels::omp::pairwise_dots(masks);
  const double d = static_cast<double>(masks.front().d());

  std::vector<bool> taken(n, false);
  std::vector<double> overlap_sum(n, 0.0);
  while (picked.size() < cfg.k_prime) {
    std::size_t best = n;
    double best_gain = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i] || !(candidates[i].score > cfg.tau)) continue;
      double gain = candidates[i].score;
      if (!picked.empty()) {
        gain -= cfg.lambda_ol * overlap_sum[i] / static_cast<double>(picked.size());
      }
      if (best == n || gain > best_gain) {
        best = i;
        best_gain = gain;
      }
    }
    if (best == n) break;
    taken[best] = true;
    picked.push_back(best);
    for (std::size_t i = 0; i < n; ++i) {
      overlap_sum[i] += d == 0.0 ? 0.0 : static_cast<double>(dots[i * n + best]) / d;
    }
  }
  return picked;
}

std::vector<std::size_t> brute_force_select(
    std::span<const SelectionCandidate> candidates, const SelectionConfig& cfg) {
  cfg.validate();
  if (candidates.size() > kMaxBruteForce) {
    throw CapacityError("brute_force_select: " + std::to_string(candidates.size()) +
                        " candidates exceeds the limit of " +
                        std::to_string(kMaxBruteForce));
  }
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].score > cfg.tau) eligible.push_back(i);
  }
  const std::size_t size = std::min(cfg.k_prime, eligible.size());
  if (size == 0) return {};

  // Lexicographic enumeration of index combinations into `eligible`.
  std::vector<std::size_t> pos(size);
  for (std::size_t i = 0; i < size; ++i) pos[i] = i;
  std::vector<std::size_t> subset(size), best;
  double best_value = 0.0;
  while (true) {
    for (std::size_t i = 0; i < size; ++i) subset[i] = eligible[pos[i]];
    const double value = objective(subset, candidates, cfg);
    if (best.empty() || value > best_value) {
      best = subset;
      best_value = value;
    }
    std::size_t i = size;
    while (i > 0 && pos[i - 1] == eligible.size() - size + (i - 1)) --i;
    if (i == 0) break;
    ++pos[i - 1];
    for (std::size_t j = i; j < size; ++j) pos[j] = pos[j - 1] + 1;
  }
  return best;
}

void WssInstance::validate() const {
  const std::size_t n = vertex_weights.size();
  if (edge_weights.rows() != n || edge_weights.cols() != n) {
    throw ShapeError("wss: edge weight matrix must be n x n");
  }
  for (std::size_t u = 0; u < n; ++u) {
    if (edge_weights(u, u) != 0.0) throw ArgumentError("wss: nonzero diagonal");
    for (std::size_t v = u + 1; v < n; ++v) {
      if (edge_weights(u, v) != edge_weights(v, u)) {
        throw ArgumentError("wss: edge weights not symmetric");
      }
    }
  }
  if (k > n) throw ArgumentError("wss: k exceeds vertex count");
}

WssInstance clique_to_wss(const Graph& graph, std::size_t q, double big_b) {
  if (!(big_b > static_cast<double>(q))) {
    throw ArgumentError("clique_to_wss: big_b must exceed q");
  }
  if (q > graph.n) throw ArgumentError("clique_to_wss: q exceeds vertex count");
  WssInstance inst;
  inst.vertex_weights.assign(graph.n, 1.0);
  inst.edge_weights = Matrix(graph.n, graph.n);
  for (std::size_t u = 0; u < graph.n; ++u) {
    for (std::size_t v = 0; v < graph.n; ++v) {
      if (u != v && !graph.edge(u, v)) inst.edge_weights(u, v) = big_b;
    }
  }
  inst.k = q;
  return inst;
}

double wss_value(const WssInstance& inst, std::span<const std::size_t> subset) {
  if (subset.size() != inst.k) {
    throw ArgumentError("wss_value: subset size must equal k");
  }
  double w = 0.0;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] >= inst.vertex_weights.size()) {
      throw ArgumentError("wss_value: vertex out of range");
    }
    w += inst.vertex_weights[subset[i]];
    for (std::size_t j = i + 1; j < subset.size(); ++j) {
      w -= inst.edge_weights(subset[i], subset[j]);
    }
  }
  return w;
}

WssOptimum wss_maximize(const WssInstance& inst) {
  inst.validate();
  const std::size_t n = inst.vertex_weights.size();
  if (n > kMaxBruteForce) throw CapacityError("wss_maximize: instance too large");
  WssOptimum best;
  bool found = false;
  std::vector<std::size_t> subset;
  for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
    if (static_cast<std::size_t>(std::popcount(bits)) != inst.k) continue;
    subset.clear();
    for (std::size_t v = 0; v < n; ++v) {
      if (bits >> v & 1u) subset.push_back(v);
    }
    const double w = wss_value(inst, subset);
    if (!found || w > best.value) {
      best.value = w;
      best.subset = subset;
      found = true;
    }
  }
  return best;
}

WssInstance selection_as_wss(std::span<const SelectionCandidate> candidates,
                             const SelectionConfig& cfg) {
  cfg.validate();
  const std::size_t n = candidates.size();
  const double kp = static_cast<double>(cfg.k_prime);
  WssInstance inst;
  inst.k = cfg.k_prime;
  inst.vertex_weights.resize(n);
  inst.edge_weights = Matrix(n, n);
  for (std::size_t u = 0; u < n; ++u) {
    inst.vertex_weights[u] = candidates[u].score / kp;
    if (cfg.k_prime == 1) continue;
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v) continue;
      inst.edge_weights(u, v) = 2.0 * cfg.lambda_ol *
                                overlap(candidates[u].mask, candidates[v].mask) /
                                (kp * (kp - 1.0));
    }
  }
  return inst;
}

}  // namespace mosaic
