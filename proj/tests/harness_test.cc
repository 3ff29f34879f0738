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

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "mosaic/config.h"
#include "mosaic/corpus.h"
#include "mosaic/errors.h"
#include "mosaic/harness.h"

namespace mosaic {
namespace {

// ---------------------------------------------------------------------------
// Corpus.

TEST(GenCorpus, OneFactGivesOneDocumentAndQuery) {
  CorpusOptions o;
  o.num_topics = 1;
  o.facts_per_topic = 1;
  const Corpus c = gen_corpus(o);
  ASSERT_EQ(c.documents.size(), 1u);
  ASSERT_EQ(c.queries.size(), 1u);
  ASSERT_EQ(c.documents[0].triples.size(), 1u);
  EXPECT_EQ(c.queries[0].answer, c.documents[0].triples[0].object);
  EXPECT_EQ(c.queries[0].doc_id, c.documents[0].doc_id);
  EXPECT_EQ(c.queries[0].tokens, question_for(c.documents[0].triples[0], c.templates));
}

TEST(GenCorpus, TopicsShareNoSubjects) {
  CorpusOptions o;
  o.num_topics = 5;
  o.facts_per_topic = 6;
  const Corpus c = gen_corpus(o);
  std::map<Token, std::set<std::uint32_t>> topics_of;
  for (const Document& d : c.documents) {
    for (const Triple& t : d.triples) topics_of[t.subject].insert(d.topic);
  }
  for (const auto& [subject, topics] : topics_of) EXPECT_EQ(topics.size(), 1u);
}

TEST(GenCorpus, RedundantCopiesRestateTheFact) {
  CorpusOptions o;
  o.num_topics = 2;
  o.facts_per_topic = 3;
  o.docs_per_fact = 3;
  const Corpus c = gen_corpus(o);
  EXPECT_EQ(c.documents.size(), 18u);
  EXPECT_EQ(c.queries.size(), 6u);
  for (const Query& q : c.queries) {
    std::size_t copies = 0;
    for (const Document& d : c.documents) {
      if (d.triples[0].object == q.answer && d.triples[0].subject == q.tokens[1]) ++copies;
    }
    EXPECT_EQ(copies, 3u);
  }
}

TEST(GenCorpus, DeterministicAndSerializable) {
  CorpusOptions o;
  o.num_topics = 3;
  o.facts_per_topic = 4;
  o.seed = 17;
  const Corpus a = gen_corpus(o), b = gen_corpus(o);
  std::ostringstream da, db, qa, va;
  write_corpus_jsonl(da, a.documents);
  write_corpus_jsonl(db, b.documents);
  EXPECT_EQ(da.str(), db.str());
  std::istringstream din(da.str());
  EXPECT_EQ(read_corpus_jsonl(din), a.documents);
  write_queries_jsonl(qa, a.queries);
  std::istringstream qin(qa.str());
  EXPECT_EQ(read_queries_jsonl(qin), a.queries);
  write_vocab_json(va, a.vocab);
  std::istringstream vin(va.str());
  EXPECT_EQ(read_vocab_json(vin), a.vocab);
  for (const Document& d : a.documents) {
    for (Token t : d.tokens) EXPECT_LT(t, a.vocab.size());
  }
}

TEST(GenCorpus, Errors) {
  CorpusOptions o;
  o.num_topics = 0;
  EXPECT_THROW(gen_corpus(o), ArgumentError);
  o = CorpusOptions{};
  o.vocab_size = 40;
  EXPECT_THROW(gen_corpus(o), ArgumentError);
  o = CorpusOptions{};
  o.docs_per_fact = 0;
  EXPECT_THROW(gen_corpus(o), ArgumentError);
  std::istringstream bad("{\"doc_id\": 1}\n");
  EXPECT_THROW(read_corpus_jsonl(bad), FormatError);
}

// ---------------------------------------------------------------------------
// Partitioning.

std::vector<Document> two_topic_docs() {
  CorpusOptions o;
  o.num_topics = 2;
  o.facts_per_topic = 20;
  return gen_corpus(o).documents;
}

TEST(DirichletPartition, SingleSiloTakesEverything) {
  const auto docs = two_topic_docs();
  const auto parts = dirichlet_partition(docs, 1, 0.1, 3);
  ASSERT_EQ(parts.size(), 1u);
  EXPECT_EQ(parts[0], docs);
}

TEST(DirichletPartition, ExhaustiveAndExclusive) {
  const auto docs = two_topic_docs();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto parts = dirichlet_partition(docs, 4, seed % 2 ? 0.1 : 10.0, seed);
    ASSERT_EQ(parts.size(), 4u);
    std::multiset<DocId> seen;
    for (const auto& p : parts) {
      for (const Document& d : p) seen.insert(d.doc_id);
      EXPECT_TRUE(std::is_sorted(p.begin(), p.end(),
                                 [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; }));
    }
    std::multiset<DocId> all;
    for (const Document& d : docs) all.insert(d.doc_id);
    EXPECT_EQ(seen, all);
  }
}

// Mean over topics of the share held by the topic's largest silo.
double concentration(const std::vector<std::vector<Document>>& parts, std::size_t topics) {
  double total = 0.0;
  for (std::uint32_t t = 0; t < topics; ++t) {
    std::size_t biggest = 0, all = 0;
    for (const auto& p : parts) {
      const auto n = static_cast<std::size_t>(
          std::count_if(p.begin(), p.end(), [t](const Document& d) { return d.topic == t; }));
      biggest = std::max(biggest, n);
      all += n;
    }
    total += static_cast<double>(biggest) / static_cast<double>(all);
  }
  return total / static_cast<double>(topics);
}

TEST(DirichletPartition, SmallAlphaConcentratesTopics) {
  const auto docs = two_topic_docs();
  double skewed = 0.0, flat = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    skewed += concentration(dirichlet_partition(docs, 4, 0.1, seed), 2) / 10.0;
    flat += concentration(dirichlet_partition(docs, 4, 100.0, seed), 2) / 10.0;
  }
  EXPECT_GT(skewed, 0.75);
  EXPECT_LT(flat, 0.5);
}

TEST(DirichletPartition, Errors) {
  const auto docs = two_topic_docs();
  EXPECT_THROW(dirichlet_partition(docs, 0, 0.1, 1), ArgumentError);
  EXPECT_THROW(dirichlet_partition(docs, 2, 0.0, 1), ArgumentError);
}

// ---------------------------------------------------------------------------
// Metric.

TEST(TokenF1, Examples) {
  EXPECT_DOUBLE_EQ(token_f1(TokenSeq{4, 5}, TokenSeq{4, 5}), 1.0);
  EXPECT_DOUBLE_EQ(token_f1(TokenSeq{4, 5}, TokenSeq{6, 7}), 0.0);
  EXPECT_DOUBLE_EQ(token_f1(TokenSeq{1, 2}, TokenSeq{2, 3}), 0.5);
  EXPECT_DOUBLE_EQ(token_f1(TokenSeq{}, TokenSeq{2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(token_f1(TokenSeq{2, 2, 2}, TokenSeq{2}), 0.5);
  EXPECT_THROW(token_f1(TokenSeq{1}, TokenSeq{}), ArgumentError);
}

// ---------------------------------------------------------------------------
// Config.

TEST(Config, SerializeParseRoundTrip) {
  ExperimentConfig cfg;
  cfg.seed = 99;
  cfg.mask_lr = 0.1 + 0.2;
  cfg.rescale = Rescale::kOn;
  cfg.naive_upload = NaiveUpload::kPerDocument;
  cfg.selection = false;
  const ExperimentConfig back = parse_config(cfg.serialize());
  EXPECT_EQ(back.serialize(), cfg.serialize());
  EXPECT_EQ(back.hash(), cfg.hash());
  EXPECT_EQ(back.mask_lr, cfg.mask_lr);
  EXPECT_EQ(cfg.hash_hex().size(), 16u);
}

TEST(Config, HashTracksEveryKey) {
  const ExperimentConfig base;
  std::set<std::uint64_t> hashes{base.hash()};
  for (const auto& [key, value] : base.entries()) {
    ExperimentConfig changed = base;
    const std::string alt = value == "on" ? "off"
                            : value == "off" ? "on"
                            : value == "pre_averaged" ? "per_document"
                            : value == "0" ? "1" : value + "1";
    set_config_value(changed, key, alt);
    EXPECT_TRUE(hashes.insert(changed.hash()).second) << key;
  }
}

TEST(Config, ParsesCommentsAndRejectsUnknownKeys) {
  const ExperimentConfig cfg = parse_config("# experiment\nseed = 3  # inline\n\nsilos=2\n");
  EXPECT_EQ(cfg.seed, 3u);
  EXPECT_EQ(cfg.silos, 2u);
  EXPECT_THROW(parse_config("no_such_key = 1\n"), ArgumentError);
  EXPECT_THROW(parse_config("seed = seven\n"), ArgumentError);
  EXPECT_THROW(parse_config("seed 7\n"), ArgumentError);
  EXPECT_THROW(parse_config("dirichlet_alpha = 0\n"), ArgumentError);
}

TEST(Config, Modes) {
  for (Mode m : {Mode::kMosaic, Mode::kNaive, Mode::kPerDocLocal, Mode::kNoAdapter}) {
    EXPECT_EQ(parse_mode(mode_name(m)), m);
  }
  EXPECT_THROW(parse_mode("bogus"), ArgumentError);
}

// ---------------------------------------------------------------------------
// Experiments on a reduced fixture.

ExperimentConfig small_experiment() {
  ExperimentConfig cfg;
  cfg.num_topics = 3;
  cfg.facts_per_topic = 4;
  cfg.silos = 3;
  cfg.cap = 4;
  cfg.adapter_epochs = 30;
  cfg.mask_epochs = 20;
  return cfg;
}

TEST(RunExperiment, NoAdapterIsTheBaseModel) {
  const ExperimentConfig cfg = small_experiment();
  const ExperimentResult r = run_experiment(cfg, Mode::kNoAdapter);
  const Corpus corpus = make_corpus(cfg);
  const ToyLM model = make_model(cfg);
  ASSERT_EQ(r.records.size(), corpus.queries.size());
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    EXPECT_EQ(r.records[i].predicted,
              generate(model, Matrix(model.d(), model.d()), corpus.queries[i].tokens,
                       cfg.max_answer_len));
    EXPECT_EQ(r.records[i].comm.total(), 0u);
  }
}

TEST(RunExperiment, RecordsAndAggregatesAreConsistent) {
  const ExperimentConfig cfg = small_experiment();
  const ExperimentResult r = run_experiment(cfg, Mode::kMosaic);
  double f1 = 0.0, em = 0.0, total = 0.0;
  for (const EvalRecord& rec : r.records) {
    EXPECT_GE(rec.token_f1, 0.0);
    EXPECT_LE(rec.token_f1, 1.0);
    if (rec.exact_match) EXPECT_EQ(rec.token_f1, 1.0);
    f1 += rec.token_f1;
    em += rec.exact_match;
    total += static_cast<double>(rec.comm.total());
  }
  const double n = static_cast<double>(r.records.size());
  EXPECT_NEAR(r.aggregate.mean_token_f1, f1 / n, 1e-12);
  EXPECT_NEAR(r.aggregate.mean_exact_match, em / n, 1e-12);
  EXPECT_NEAR(r.aggregate.mean_total_bytes, total / n, 1e-9);
  EXPECT_GT(r.aggregate.mean_token_f1, 0.0);
}

TEST(RunExperiment, SelectionBeatsAggregatingEverything) {
  const ExperimentConfig cfg = small_experiment();
  ExperimentConfig off = cfg;
  off.selection = false;
  EXPECT_GE(run_experiment(cfg, Mode::kMosaic).aggregate.mean_token_f1,
            run_experiment(off, Mode::kMosaic).aggregate.mean_token_f1);
}

TEST(RunExperiment, ReportsAreByteIdenticalAndHashStamped) {
  const ExperimentConfig cfg = small_experiment();
  std::ostringstream csv1, csv2, json1, json2;
  const ExperimentResult a = run_experiment(cfg, Mode::kMosaic);
  const ExperimentResult b = run_experiment(cfg, Mode::kMosaic);
  write_records_csv(csv1, cfg, a);
  write_records_csv(csv2, cfg, b);
  write_summary_json(json1, cfg, a);
  write_summary_json(json2, cfg, b);
  EXPECT_EQ(csv1.str(), csv2.str());
  EXPECT_EQ(json1.str(), json2.str());
  EXPECT_NE(json1.str().find(cfg.hash_hex()), std::string::npos);
  std::istringstream lines(csv1.str());
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) EXPECT_NE(line.find(cfg.hash_hex()), std::string::npos);
}

// ---------------------------------------------------------------------------
// Checks exposed through the command line.

TEST(SelectionCheck, ZeroLambdaIsExact) {
  const std::vector<double> lambdas{0.0, 1.0};
  for (const SelectionCheckRow& row : selection_check(3, lambdas, 50, 12, 4)) {
    EXPECT_TRUE(row.threshold_ok);
    if (row.lambda_ol == 0.0) EXPECT_TRUE(row.same_set);
    EXPECT_LE(row.greedy_objective, row.optimal_objective + 1e-12);
  }
}

TEST(ReductionCheck, SmallGraphsHaveNoMismatch) {
  const ReductionCheck r = reduction_check_exhaustive(4);
  EXPECT_EQ(r.graphs, 64u);
  EXPECT_EQ(r.mismatches, 0u);
  EXPECT_EQ(reduction_check_random(7, 50, 1).mismatches, 0u);
}

TEST(GradCheck, WithinTolerance) {
  for (const GradCheckRow& row : gradcheck(5, 5, 1e-5)) EXPECT_LT(row.relative_error, 1e-4);
}

}  // namespace
}  // namespace mosaic
