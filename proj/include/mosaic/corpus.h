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

#ifndef MOSAIC_CORPUS_H_
#define MOSAIC_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mosaic/document.h"
#include "mosaic/toylm.h"

namespace mosaic {

// Synthetic fact corpus. Token layout:
//   0 "<q>", 1 "<end>", 2.. fillers, then relations, then per topic one topic
//   token, its descriptors and its object pool, then one subject per fact.
struct CorpusOptions {
  std::size_t num_topics = 8;
  std::size_t facts_per_topic = 10;
  std::size_t vocab_size = 256;
  std::size_t num_fillers = 8;
  std::size_t num_relations = 6;
  std::size_t descriptors_per_topic = 6;
  std::size_t objects_per_topic = 4;
  std::size_t descriptors_per_doc = 3;
  double multi_token_object_rate = 0.25;
  std::size_t docs_per_fact = 1;  // documents restating each fact
  std::uint64_t seed = 0;
};

inline constexpr Token kQuestionToken = 0;
inline constexpr Token kEndToken = 1;

struct Corpus {
  std::vector<std::string> vocab;  // index = token id
  std::vector<Document> documents;
  std::vector<Query> queries;  // one per fact, in generation order
  TemplateVocab templates;
};

// Throws ArgumentError for non-positive sizes or a vocabulary too small for
// the layout.
Corpus gen_corpus(const CorpusOptions& options);

// Per topic: draw silo weights from Dirichlet(alpha) and send each of that
// topic's documents to a silo drawn from them. Returns one corpus per silo,
// documents in input order.
std::vector<std::vector<Document>> dirichlet_partition(
    const std::vector<Document>& documents, std::size_t num_silos,
    double alpha, std::uint64_t seed);

// Multiset token F1; 0 for an empty prediction, ArgumentError on empty gold.
double token_f1(const TokenSeq& pred, const TokenSeq& gold);

// JSON-lines {doc_id, topic, tokens, triples: [[s, r, [o...]], ...]}.
void write_corpus_jsonl(std::ostream& out, const std::vector<Document>& docs);
std::vector<Document> read_corpus_jsonl(std::istream& in);
// JSON-lines {query_id, doc_id, tokens, answer}.
void write_queries_jsonl(std::ostream& out, const std::vector<Query>& queries);
std::vector<Query> read_queries_jsonl(std::istream& in);
// JSON list of token strings.
void write_vocab_json(std::ostream& out, const std::vector<std::string>& vocab);
std::vector<std::string> read_vocab_json(std::istream& in);

// Filler tokens as laid out by gen_corpus for `num_fillers`.
TemplateVocab default_templates(std::size_t num_fillers);

}  // namespace mosaic

#endif  // MOSAIC_CORPUS_H_
