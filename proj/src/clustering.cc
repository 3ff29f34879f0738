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

#include "mosaic/clustering.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#include "mosaic/errors.h"
#include "mosaic/rng.h"

namespace mosaic {
namespace {

using Points = std::span<const std::vector<double>>;
using Centroids = std::vector<std::vector<double>>;
using Labels = std::vector<std::size_t>;

double sq_dist(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    acc += diff * diff;
  }
  return acc;
}

double cost(Points points, const Centroids& centroids, const Labels& labels) {
  double acc = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    acc += sq_dist(points[i], centroids[labels[i]]);
  }
  return acc;
}

Centroids farthest_point_seeding(Points points, std::size_t t,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 0x6b6d65616e73ULL));
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  Centroids centroids{points[first(rng)]};
  std::vector<double> nearest(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    nearest[i] = sq_dist(points[i], centroids.front());
  }
  while (centroids.size() < t) {
    const auto far = std::max_element(nearest.begin(), nearest.end());
    const std::size_t pick = static_cast<std::size_t>(far - nearest.begin());
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      nearest[i] = std::min(nearest[i], sq_dist(points[i], centroids.back()));
    }
  }
  return centroids;
}

Labels assign(Points points, const Centroids& centroids, std::size_t cap) {
  const std::size_t n = points.size(), t = centroids.size();
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  pairs.reserve(n * t);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < t; ++c) {
      pairs.emplace_back(sq_dist(points[i], centroids[c]), i, c);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();
  Labels labels(n, kUnassigned);
  std::vector<std::size_t> load(t, 0);
  std::size_t placed = 0;
  for (const auto& [dist, i, c] : pairs) {
    if (labels[i] != kUnassigned || load[c] == cap) continue;
    labels[i] = c;
    ++load[c];
    if (++placed == n) break;
  }
  // Empty clusters take the point farthest from the largest cluster's centre.
  for (std::size_t c = 0; c < t; ++c) {
    if (load[c] != 0) continue;
    const std::size_t donor = static_cast<std::size_t>(
        std::max_element(load.begin(), load.end()) - load.begin());
    std::size_t victim = kUnassigned;
    double worst = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] != donor) continue;
      const double dist = sq_dist(points[i], centroids[donor]);
      if (dist > worst) {
        worst = dist;
        victim = i;
      }
    }
    labels[victim] = c;
    --load[donor];
    ++load[c];
  }
  return labels;
}

Centroids recenter(Points points, const Labels& labels, std::size_t t) {
  const std::size_t dim = points.front().size();
  Centroids centroids(t, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> count(t, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) centroids[labels[i]][j] += points[i][j];
    ++count[labels[i]];
  }
  for (std::size_t c = 0; c < t; ++c) {
    for (double& v : centroids[c]) v /= static_cast<double>(count[c]);
  }
  return centroids;
}

}  // namespace

ClusterAssignment constrained_kmeans(Points points, std::span<const DocId> ids,
                                     std::size_t cap, std::uint64_t seed,
                                     std::size_t max_iters,
                                     std::vector<double>* sse_history) {
  if (cap < 1) throw ArgumentError("constrained_kmeans: cap must be >= 1");
  if (points.empty()) throw ArgumentError("constrained_kmeans: no points");
  if (ids.size() != points.size()) {
    throw ArgumentError("constrained_kmeans: one id per point required");
  }
  for (const auto& p : points) {
    if (p.size() != points.front().size()) {
      throw ShapeError("constrained_kmeans: points differ in dimension");
    }
  }
  const std::size_t n = points.size();
  const std::size_t t = (n + cap - 1) / cap;

  Centroids centroids = farthest_point_seeding(points, t, seed);
  Labels labels = assign(points, centroids, cap);
  centroids = recenter(points, labels, t);
  double sse = cost(points, centroids, labels);
  if (sse_history != nullptr) sse_history->assign(1, sse);

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    Labels next = assign(points, centroids, cap);
    if (next == labels || cost(points, centroids, next) >= sse) break;
    labels = std::move(next);
    centroids = recenter(points, labels, t);
    sse = cost(points, centroids, labels);
    if (sse_history != nullptr) sse_history->push_back(sse);
  }

  ClusterAssignment out;
  out.t = t;
  out.cap = cap;
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.assignment.emplace(ids[i], labels[i]).second) {
      throw ArgumentError("constrained_kmeans: duplicate document id");
    }
  }
  return out;
}

ClusterAssignment constrained_kmeans(Points points, std::size_t cap,
                                     std::uint64_t seed, std::size_t max_iters) {
  std::vector<DocId> ids(points.size());
  std::iota(ids.begin(), ids.end(), DocId{0});
  return constrained_kmeans(points, ids, cap, seed, max_iters);
}

std::vector<DocId> cluster_members(const ClusterAssignment& assignment,
                                   std::size_t cluster_index) {
  if (cluster_index >= assignment.t) {
    throw ArgumentError("cluster_members: cluster index out of range");
  }
  std::vector<DocId> out;
  for (const auto& [id, c] : assignment.assignment) {
    if (c == cluster_index) out.push_back(id);
  }
  return out;
}

double within_cluster_sse(Points points, std::span<const DocId> ids,
                          const ClusterAssignment& assignment) {
  Labels labels(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    labels[i] = assignment.assignment.at(ids[i]);
  }
  return cost(points, recenter(points, labels, assignment.t), labels);
}

}  // namespace mosaic
