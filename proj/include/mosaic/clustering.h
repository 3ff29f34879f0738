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

#ifndef MOSAIC_CLUSTERING_H_
#define MOSAIC_CLUSTERING_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "mosaic/document.h"

namespace mosaic {

struct ClusterAssignment {
  std::map<DocId, std::size_t> assignment;
  std::size_t t = 0;    // number of clusters
  std::size_t cap = 0;  // maximum cluster size

  friend bool operator==(const ClusterAssignment&,
                         const ClusterAssignment&) = default;
};

// Size-constrained k-means with t = ceil(N / cap) clusters.
//
// Each assignment step offers every centroid `cap` slots and fills them by a
// greedy pass over (squared distance, point, cluster) in ascending order;
// clusters left empty take the point farthest from the largest cluster's
// centroid. A step is only accepted if it lowers the cost under the current
// centroids, so the within-cluster sum of squares never increases.
//
// `ids` names the points (defaults to 0..N-1). `sse_history`, if given,
// receives the SSE after the initial assignment and after every iteration.
ClusterAssignment constrained_kmeans(std::span<const std::vector<double>> points,
                                     std::span<const DocId> ids,
                                     std::size_t cap, std::uint64_t seed,
                                     std::size_t max_iters,
                                     std::vector<double>* sse_history = nullptr);
ClusterAssignment constrained_kmeans(std::span<const std::vector<double>> points,
                                     std::size_t cap, std::uint64_t seed,
                                     std::size_t max_iters);

// Members of one cluster in ascending id order.
std::vector<DocId> cluster_members(const ClusterAssignment& assignment,
                                   std::size_t cluster_index);

// Within-cluster SSE of `assignment` around the member means.
double within_cluster_sse(std::span<const std::vector<double>> points,
                          std::span<const DocId> ids,
                          const ClusterAssignment& assignment);

}  // namespace mosaic

#endif  // MOSAIC_CLUSTERING_H_
