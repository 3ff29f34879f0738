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

#ifndef MOSAIC_RETRIEVAL_H_
#define MOSAIC_RETRIEVAL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mosaic/document.h"

namespace mosaic {

using Embedding = std::vector<double>;

// Signed feature hashing of a bag of tokens into `dim` buckets, l2-normalized.
// If every bucket cancels to zero the unsigned bag is used instead.
Embedding embed(std::span<const Token> tokens, std::size_t dim,
                std::uint64_t seed);

double cosine(std::span<const double> x, std::span<const double> y);

struct ScoredDoc {
  DocId doc_id = 0;
  double cosine = 0.0;

  friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

// Unit vectors keyed by document id, kept in ascending id order.
class EmbeddingIndex {
 public:
  explicit EmbeddingIndex(std::size_t dim = 0) : dim_(dim) {}

  // ArgumentError on duplicate id or a vector whose norm is not 1 +- 1e-9.
  void add(DocId doc_id, Embedding vec);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  std::span<const DocId> ids() const { return ids_; }
  const Embedding& vector_at(std::size_t i) const { return vecs_[i]; }
  // ArgumentError if absent.
  const Embedding& find(DocId doc_id) const;

  friend bool operator==(const EmbeddingIndex&,
                         const EmbeddingIndex&) = default;

 private:
  std::size_t dim_;
  std::vector<DocId> ids_;
  std::vector<Embedding> vecs_;
};

// The k highest-cosine entries, descending, ties to the lower id.
std::vector<ScoredDoc> topk(const EmbeddingIndex& index,
                            std::span<const double> query, std::size_t k);

// Relevance in [0, 1]: (cosine + 1) / 2, clamped. Identical at every silo.
std::vector<double> rerank(std::span<const double> query,
                           std::span<const Embedding> docs);
double rerank_score(double cosine);

}  // namespace mosaic

#endif  // MOSAIC_RETRIEVAL_H_
