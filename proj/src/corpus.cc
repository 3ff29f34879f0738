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

#include "mosaic/corpus.h"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <string>

#include "json.hpp"

#include "mosaic/errors.h"
#include "mosaic/rng.h"

namespace mosaic {

namespace {

constexpr const char* kFillerWords[] = {"the", "of",  "is", "was", "a",
                                        "in",  "as",  "by", "for", "on",
                                        "at",  "and", "to", "with", "from"};

}  // namespace

TemplateVocab default_templates(std::size_t num_fillers) {
  TemplateVocab t;
  t.question = kQuestionToken;
  for (std::size_t i = 0; i < num_fillers; ++i) {
    t.fillers.push_back(static_cast<Token>(2 + i));
  }
  return t;
}

Corpus gen_corpus(const CorpusOptions& o) {
  if (o.num_topics == 0 || o.facts_per_topic == 0 || o.num_relations == 0 ||
      o.objects_per_topic == 0 || o.docs_per_fact == 0) {
    throw ArgumentError("gen_corpus: sizes must be positive");
  }
  if (o.num_fillers > std::size(kFillerWords)) {
    throw ArgumentError("gen_corpus: too many fillers");
  }
  if (o.descriptors_per_doc > o.descriptors_per_topic) {
    throw ArgumentError("gen_corpus: descriptors_per_doc > descriptors_per_topic");
  }
  const std::size_t per_topic = 1 + o.descriptors_per_topic + o.objects_per_topic;
  const std::size_t needed = 2 + o.num_fillers + o.num_relations +
                             o.num_topics * (per_topic + o.facts_per_topic);
  if (needed > o.vocab_size) {
    throw ArgumentError("gen_corpus: layout needs " + std::to_string(needed) +
                        " tokens but vocab_size is " +
                        std::to_string(o.vocab_size));
  }

  Corpus c;
  c.templates = default_templates(o.num_fillers);
  c.vocab = {"<q>", "<end>"};
  for (std::size_t i = 0; i < o.num_fillers; ++i) c.vocab.push_back(kFillerWords[i]);
  const Token relation_base = static_cast<Token>(c.vocab.size());
  for (std::size_t r = 0; r < o.num_relations; ++r) {
    c.vocab.push_back("rel" + std::to_string(r));
  }
  struct TopicTokens {
    Token topic;
    Token descriptors;
    Token objects;
  };
  std::vector<TopicTokens> topics;
  for (std::size_t t = 0; t < o.num_topics; ++t) {
    const std::string ts = std::to_string(t);
    TopicTokens tt;
    tt.topic = static_cast<Token>(c.vocab.size());
    c.vocab.push_back("topic" + ts);
    tt.descriptors = static_cast<Token>(c.vocab.size());
    for (std::size_t i = 0; i < o.descriptors_per_topic; ++i) {
      c.vocab.push_back("desc" + ts + "_" + std::to_string(i));
    }
    tt.objects = static_cast<Token>(c.vocab.size());
    for (std::size_t i = 0; i < o.objects_per_topic; ++i) {
      c.vocab.push_back("obj" + ts + "_" + std::to_string(i));
    }
    topics.push_back(tt);
  }
  const Token subject_base = static_cast<Token>(c.vocab.size());
  for (std::size_t t = 0; t < o.num_topics; ++t) {
    for (std::size_t f = 0; f < o.facts_per_topic; ++f) {
      c.vocab.push_back("subj" + std::to_string(t) + "_" + std::to_string(f));
    }
  }
  while (c.vocab.size() < o.vocab_size) {
    c.vocab.push_back("unused" + std::to_string(c.vocab.size()));
  }

  std::mt19937_64 rng(derive_seed(o.seed, 0x636f72707573ULL));
  std::uniform_int_distribution<std::size_t> pick_rel(0, o.num_relations - 1);
  std::uniform_int_distribution<std::size_t> pick_obj(0, o.objects_per_topic - 1);
  std::uniform_int_distribution<std::size_t> pick_filler(0, o.num_fillers - 1);
  std::bernoulli_distribution multi(o.multi_token_object_rate);

  for (std::size_t t = 0; t < o.num_topics; ++t) {
    const TopicTokens& tt = topics[t];
    for (std::size_t f = 0; f < o.facts_per_topic; ++f) {
      Triple triple;
      triple.subject = static_cast<Token>(subject_base + t * o.facts_per_topic + f);
      triple.relation = static_cast<Token>(relation_base + pick_rel(rng));
      triple.object.push_back(static_cast<Token>(tt.objects + pick_obj(rng)));
      if (o.objects_per_topic > 1 && multi(rng)) {
        Token second;
        do {
          second = static_cast<Token>(tt.objects + pick_obj(rng));
        } while (second == triple.object.front());
        triple.object.push_back(second);
      }

      Query q;
      q.query_id = static_cast<std::uint32_t>(c.queries.size());
      q.doc_id = static_cast<DocId>(c.documents.size());
      q.tokens = question_for(triple, c.templates);
      q.answer = triple.object;
      c.queries.push_back(std::move(q));

      // Every copy states the same fact in a differently worded context.
      for (std::size_t copy = 0; copy < o.docs_per_fact; ++copy) {
        Document doc;
        doc.doc_id = static_cast<DocId>(c.documents.size());
        doc.topic = static_cast<std::uint32_t>(t);
        std::vector<Token> desc(o.descriptors_per_topic);
        for (std::size_t i = 0; i < desc.size(); ++i) {
          desc[i] = static_cast<Token>(tt.descriptors + i);
        }
        std::shuffle(desc.begin(), desc.end(), rng);
        doc.tokens.push_back(tt.topic);
        for (std::size_t i = 0; i < o.descriptors_per_doc; ++i) {
          doc.tokens.push_back(desc[i]);
        }
        if (o.num_fillers > 0) {
          doc.tokens.push_back(static_cast<Token>(2 + pick_filler(rng)));
        }
        doc.tokens.push_back(triple.subject);
        doc.tokens.push_back(triple.relation);
        doc.tokens.insert(doc.tokens.end(), triple.object.begin(),
                          triple.object.end());
        doc.triples.push_back(triple);
        c.documents.push_back(std::move(doc));
      }
    }
  }
  return c;
}

std::vector<std::vector<Document>> dirichlet_partition(
    const std::vector<Document>& documents, std::size_t num_silos, double alpha,
    std::uint64_t seed) {
  if (num_silos < 1) throw ArgumentError("dirichlet_partition: need >= 1 silo");
  if (!(alpha > 0.0)) throw ArgumentError("dirichlet_partition: alpha must be > 0");
  std::map<std::uint32_t, std::vector<std::size_t>> by_topic;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    by_topic[documents[i].topic].push_back(i);
  }
  std::vector<std::size_t> silo_of(documents.size(), 0);
  for (const auto& [topic, members] : by_topic) {
    std::mt19937_64 rng(derive_seed(seed, 0x646972ULL + topic));
    std::gamma_distribution<double> gamma(alpha, 1.0);
    std::vector<double> weights(num_silos);
    double total = 0.0;
    for (double& w : weights) {
      w = gamma(rng);
      total += w;
    }
    if (!(total > 0.0)) {
      // Every draw underflowed; the limit of Dirichlet(alpha -> 0) is a vertex.
      std::uniform_int_distribution<std::size_t> vertex(0, num_silos - 1);
      std::fill(weights.begin(), weights.end(), 0.0);
      weights[vertex(rng)] = 1.0;
    }
    std::discrete_distribution<std::size_t> choose(weights.begin(), weights.end());
    for (std::size_t i : members) silo_of[i] = choose(rng);
  }
  std::vector<std::vector<Document>> out(num_silos);
  for (std::size_t i = 0; i < documents.size(); ++i) {
    out[silo_of[i]].push_back(documents[i]);
  }
  return out;
}

double token_f1(const TokenSeq& pred, const TokenSeq& gold) {
  if (gold.empty()) throw ArgumentError("token_f1: empty gold answer");
  if (pred.empty()) return 0.0;
  std::map<Token, std::size_t> gold_counts;
  for (Token t : gold) ++gold_counts[t];
  std::size_t common = 0;
  for (Token t : pred) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

// ---------------------------------------------------------------------------
// JSON IO

using nlohmann::json;

void write_corpus_jsonl(std::ostream& out, const std::vector<Document>& docs) {
  for (const Document& d : docs) {
    json triples = json::array();
    for (const Triple& t : d.triples) {
      triples.push_back(json::array({t.subject, t.relation, t.object}));
    }
    json rec = {{"doc_id", d.doc_id},
                {"topic", d.topic},
                {"tokens", d.tokens},
                {"triples", triples}};
    out << rec.dump() << '\n';
  }
}

std::vector<Document> read_corpus_jsonl(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      Document d;
      d.doc_id = rec.at("doc_id").get<DocId>();
      d.topic = rec.at("topic").get<std::uint32_t>();
      d.tokens = rec.at("tokens").get<TokenSeq>();
      for (const json& t : rec.at("triples")) {
        Triple tr;
        tr.subject = t.at(0).get<Token>();
        tr.relation = t.at(1).get<Token>();
        tr.object = t.at(2).is_array() ? t.at(2).get<TokenSeq>()
                                       : TokenSeq{t.at(2).get<Token>()};
        d.triples.push_back(std::move(tr));
      }
      docs.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw FormatError(std::string("corpus record: ") + e.what());
    }
  }
  return docs;
}

void write_queries_jsonl(std::ostream& out, const std::vector<Query>& queries) {
  for (const Query& q : queries) {
    json rec = {{"query_id", q.query_id},
                {"doc_id", q.doc_id},
                {"tokens", q.tokens},
                {"answer", q.answer}};
    out << rec.dump() << '\n';
  }
}

std::vector<Query> read_queries_jsonl(std::istream& in) {
  std::vector<Query> queries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      Query q;
      q.query_id = rec.at("query_id").get<std::uint32_t>();
      q.doc_id = rec.at("doc_id").get<DocId>();
      q.tokens = rec.at("tokens").get<TokenSeq>();
      q.answer = rec.at("answer").get<TokenSeq>();
      queries.push_back(std::move(q));
    } catch (const json::exception& e) {
      throw FormatError(std::string("query record: ") + e.what());
    }
  }
  return queries;
}

void write_vocab_json(std::ostream& out, const std::vector<std::string>& vocab) {
  out << json(vocab).dump() << '\n';
}

std::vector<std::string> read_vocab_json(std::istream& in) {
  try {
    return json::parse(in).get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("vocabulary file: ") + e.what());
  }
}

}  // namespace mosaic
