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

#include "mosaic/retrieval.h"

#include <algorithm>
#include <cmath>

#include "mosaic/errors.h"
#include "mosaic/rng.h"

namespace mosaic {

Embedding embed(std::span<const Token> tokens, std::size_t dim,
                std::uint64_t seed) {
  if (tokens.empty()) throw ArgumentError("embed: empty token sequence");
  if (dim == 0) throw ArgumentError("embed: dimension must be positive");
  const std::uint64_t salt = derive_seed(seed, 0x68617368ULL);
  Embedding signed_vec(dim, 0.0), unsigned_vec(dim, 0.0);
  for (Token t : tokens) {
    const std::uint64_t h = mix64(salt ^ t);
    const std::size_t bucket = static_cast<std::size_t>(h % dim);
    signed_vec[bucket] += (h >> 63) ? -1.0 : 1.0;
    unsigned_vec[bucket] += 1.0;
  }
  auto norm = [](const Embedding& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
  };
  double n = norm(signed_vec);
  Embedding& out = n > 0.0 ? signed_vec : unsigned_vec;
  if (n == 0.0) n = norm(unsigned_vec);
  for (double& x : out) x /= n;
  return out;
}

double cosine(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("cosine: dimension mismatch");
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xy += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  if (xx == 0.0 || yy == 0.0) return 0.0;
  return xy / std::sqrt(xx * yy);
}

void EmbeddingIndex::add(DocId doc_id, Embedding vec) {
  if (vec.size() != dim_) throw ShapeError("index: embedding dimension mismatch");
  double nn = 0.0;
  for (double x : vec) nn += x * x;
  if (std::abs(std::sqrt(nn) - 1.0) > 1e-9) {
    throw ArgumentError("index: stored vectors must be unit length");
  }
  auto it = std::lower_bound(ids_.begin(), ids_.end(), doc_id);
  if (it != ids_.end() && *it == doc_id) {
    throw ArgumentError("index: duplicate document id");
  }
  const auto pos = it - ids_.begin();
  ids_.insert(it, doc_id);
  vecs_.insert(vecs_.begin() + pos, std::move(vec));
}

const Embedding& EmbeddingIndex::find(DocId doc_id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), doc_id);
  if (it == ids_.end() || *it != doc_id) {
    throw ArgumentError("index: unknown document id");
  }
  return vecs_[static_cast<std::size_t>(it - ids_.begin())];
}

std::vector<ScoredDoc> topk(const EmbeddingIndex& index,
                            std::span<const double> query, std::size_t k) {
  if (k < 1) throw ArgumentError("topk: k must be >= 1");
  if (query.size() != index.dim()) throw ShapeError("topk: query dimension");
  std::vector<ScoredDoc> all;
  all.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    all.push_back({index.ids()[i], cosine(query, index.vector_at(i))});
  }
  const std::size_t keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep),
                    all.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
                      if (a.cosine != b.cosine) return a.cosine > b.cosine;
                      return a.doc_id < b.doc_id;
                    });
  all.resize(keep);
  return all;
}

double rerank_score(double cos) {
  return std::clamp((cos + 1.0) / 2.0, 0.0, 1.0);
}

std::vector<double> rerank(std::span<const double> query,
                           std::span<const Embedding> docs) {
  std::vector<double> out;
  out.reserve(docs.size());
  for (const Embedding& doc : docs) out.push_back(rerank_score(cosine(query, doc)));
  return out;
}

}  // namespace mosaic
