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
#include <cstring>
#include <random>
#include <set>
#include <vector>

#include "mosaic/config.h"
#include "mosaic/errors.h"
#include "mosaic/federation.h"
#include "mosaic/harness.h"
#include "oracles.h"

namespace mosaic {
namespace {

// A small federation that trains in well under a second.
ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.num_topics = 2;
  cfg.facts_per_topic = 4;
  cfg.docs_per_fact = 1;
  cfg.silos = 2;
  cfg.cap = 3;
  cfg.adapter_epochs = 30;
  cfg.mask_epochs = 10;
  return cfg;
}

struct World {
  ExperimentConfig cfg;
  Corpus corpus;
  ToyLM model;
  SiloConfig silo_cfg;
  std::vector<SiloState> silos;
};

World make_world(const ExperimentConfig& cfg) {
  Corpus corpus = make_corpus(cfg);
  ToyLM model = make_model(cfg);
  const SiloConfig silo_cfg = cfg.silo_config(corpus.templates);
  std::vector<SiloState> silos =
      build_silos(model, partition_corpus(cfg, corpus), silo_cfg);
  return {cfg, std::move(corpus), std::move(model), silo_cfg, std::move(silos)};
}

const World& world() {
  static const World w = make_world(small_config());
  return w;
}

std::vector<Document> first_docs(std::size_t n) {
  const auto& docs = world().corpus.documents;
  return {docs.begin(), docs.begin() + static_cast<long>(n)};
}

// ---------------------------------------------------------------------------
// Offline stage.

TEST(SiloOffline, CapOneIsOneAdapterPerDocument) {
  SiloConfig cfg = world().silo_cfg;
  cfg.cap = 1;
  const SiloState s = silo_offline(world().model, 0, first_docs(3), cfg);
  EXPECT_EQ(s.clusters.t, 3u);
  EXPECT_EQ(s.adapters.size(), 3u);
  EXPECT_EQ(s.masks.size(), 3u);
}

TEST(SiloOffline, SingleClusterWhenCorpusFitsCap) {
  SiloConfig cfg = world().silo_cfg;
  cfg.cap = 8;
  const SiloState s = silo_offline(world().model, 0, first_docs(8), cfg);
  EXPECT_EQ(s.adapters.size(), 1u);
  EXPECT_EQ(s.masks.size(), 8u);
  for (const auto& [doc, mask] : s.masks) EXPECT_EQ(mask.d(), s.d());
  EXPECT_NO_THROW(s.validate());
}

TEST(SiloOffline, FortyDocumentsAreByteReproducible) {
  ExperimentConfig cfg = small_config();
  cfg.num_topics = 4;
  cfg.facts_per_topic = 10;
  cfg.adapter_epochs = 5;
  cfg.mask_epochs = 3;
  const Corpus corpus = make_corpus(cfg);
  ASSERT_EQ(corpus.documents.size(), 40u);
  const ToyLM model = make_model(cfg);
  const SiloConfig sc = cfg.silo_config(corpus.templates);
  const auto a = encode_silo_state(silo_offline(model, 3, corpus.documents, sc));
  const auto b = encode_silo_state(silo_offline(model, 3, corpus.documents, sc));
  EXPECT_EQ(a, b);
}

TEST(SiloOffline, MasksOffGivesFullMasks) {
  SiloConfig cfg = world().silo_cfg;
  cfg.train_masks = false;
  const SiloState s = silo_offline(world().model, 0, first_docs(4), cfg);
  for (const auto& [doc, mask] : s.masks) EXPECT_EQ(mask, DocMask::full(s.d()));
}

TEST(SiloOffline, EmptyCorpusIsAnError) {
  EXPECT_THROW(silo_offline(world().model, 0, {}, world().silo_cfg), ArgumentError);
}

TEST(SiloState, SnapshotRoundTrip) {
  for (const SiloState& s : world().silos) {
    const auto bytes = encode_silo_state(s);
    EXPECT_EQ(decode_silo_state(bytes), s);
    std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 3);
    EXPECT_THROW(decode_silo_state(cut), FormatError);
    std::vector<std::uint8_t> bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(decode_silo_state(bad), FormatError);
  }
}

TEST(SiloState, ValidateCatchesBrokenState) {
  SiloState s = world().silos.front();
  s.masks.erase(s.masks.begin());
  EXPECT_THROW(s.validate(), ProtocolError);
  SiloState t = world().silos.front();
  t.adapters.pop_back();
  EXPECT_THROW(t.validate(), ProtocolError);
}

// ---------------------------------------------------------------------------
// Candidates and wire messages.

TEST(SiloCandidates, LargeKReturnsWholeCorpus) {
  const SiloState& s = world().silos.front();
  const auto c = silo_candidates(s, world().corpus.queries[0].tokens, 100);
  EXPECT_EQ(c.size(), s.corpus.size());
  for (const Candidate& x : c) {
    EXPECT_EQ(x.silo_id, s.silo_id);
    EXPECT_EQ(x.mask, s.masks.at(x.doc_id));
    EXPECT_GE(x.score, 0.0);
    EXPECT_LE(x.score, 1.0);
  }
}

TEST(SiloCandidates, DocumentTextRetrievesItself) {
  const SiloState& s = world().silos.front();
  for (const Document& doc : s.corpus) {
    const auto c = silo_candidates(s, doc.tokens, 3);
    ASSERT_FALSE(c.empty());
    EXPECT_EQ(c[0].doc_id, doc.doc_id);
    EXPECT_NEAR(c[0].score, 1.0, 1e-12);
  }
}

TEST(SiloCandidates, UploadSizeArithmetic) {
  const SiloState& s = world().silos.front();
  for (std::size_t k = 1; k <= 5; ++k) {
    CandidateUpload up{s.silo_id, s.d(),
                       silo_candidates(s, world().corpus.queries[1].tokens, k)};
    EXPECT_EQ(encode(up).size(), candidate_upload_size(up.candidates.size(), s.d()));
    EXPECT_EQ(candidate_upload_size(k, 64), 12 + k * (4 + 4 + 8));
  }
}

TEST(WireCodecs, RoundTrip) {
  std::mt19937_64 rng(1);
  const QueryBroadcast qb{{0, 7, 9}};
  EXPECT_EQ(decode_query_broadcast(encode(qb)), qb);
  CandidateUpload cu{4, 13, {}};
  for (DocId i = 0; i < 3; ++i) cu.candidates.push_back({4, i + 10, 0.25 * i, oracle::random_mask(13, rng)});
  EXPECT_EQ(decode_candidate_upload(encode(cu)), cu);
  const AdapterRequest rq{{{1, 5}, {1, 9}}};
  EXPECT_EQ(decode_adapter_request(encode(rq)), rq);
  AdapterUpload au{2, {{5, 0}, {9, 0}}, {}};
  AdapterPair ad = decode_adapter(encode_adapter(oracle::random_adapter(6, 2, rng)));
  au.adapters.emplace_back(0, ad);
  EXPECT_EQ(decode_adapter_upload(encode(au)), au);
  EXPECT_EQ(encode(qb).size(), 4u + 4u * 3u);
  EXPECT_EQ(encode(rq).size(), 4u + 8u * 2u);
  EXPECT_EQ(encode(au).size(), 4u + 4u + 16u + 4u + 4u + encoded_adapter_size(6, 2));
}

TEST(WireCodecs, MalformedBytesAreRejected) {
  const auto qb = encode(QueryBroadcast{{1, 2}});
  EXPECT_THROW(decode_query_broadcast(std::span(qb).first(qb.size() - 1)), FormatError);
  std::vector<std::uint8_t> longer = qb;
  longer.push_back(0);
  EXPECT_THROW(decode_query_broadcast(longer), FormatError);
  const auto rq = encode(AdapterRequest{{{0, 1}}});
  EXPECT_THROW(decode_adapter_request(std::span(rq).first(rq.size() - 2)), FormatError);
  CandidateUpload cu{0, 12, {{0, 1, 0.5, DocMask::full(12)}}};
  auto cb = encode(cu);
  cb.back() = 0xff;  // sets padding bits of the 12-bit mask
  EXPECT_THROW(decode_candidate_upload(cb), CorruptMaskError);
  EXPECT_THROW(decode_adapter_upload(std::vector<std::uint8_t>{1, 0, 0}), FormatError);
}

// Locality: the exhaustive field listing covers every message and admits no
// field able to carry document content.
TEST(Locality, SchemaCarriesNoDocumentContent) {
  const std::set<FieldKind> allowed{
      FieldKind::kCount,      FieldKind::kDimension,   FieldKind::kSiloId,
      FieldKind::kDocId,      FieldKind::kClusterKey,  FieldKind::kQueryToken,
      FieldKind::kScore,      FieldKind::kMaskBits,    FieldKind::kAdapterMagic,
      FieldKind::kAdapterParameters};
  std::set<MessageKind> covered;
  for (const WireField& f : wire_schema()) {
    EXPECT_TRUE(allowed.count(f.kind)) << f.name;
    covered.insert(f.message);
    if (f.kind == FieldKind::kQueryToken) {
      EXPECT_EQ(f.message, MessageKind::kQueryBroadcast);
    }
  }
  EXPECT_EQ(covered.size(), 4u);
}

bool contains(const std::vector<std::uint8_t>& hay, const std::vector<std::uint8_t>& needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

TEST(Locality, TranscriptsNeverContainDocumentText) {
  const World& w = world();
  QueryConfig qc = w.cfg.query_config();
  for (const Query& q : w.corpus.queries) {
    const QueryResult r = run_query(w.model, w.silos, q.tokens, qc);
    for (const SentMessage& m : r.transcript) {
      for (const Document& doc : w.corpus.documents) {
        std::vector<std::uint8_t> as_u32(doc.tokens.size() * 4), as_u8;
        std::memcpy(as_u32.data(), doc.tokens.data(), as_u32.size());
        for (Token t : doc.tokens) as_u8.push_back(static_cast<std::uint8_t>(t));
        ASSERT_FALSE(contains(m.bytes, as_u32)) << message_kind_name(m.kind);
        ASSERT_FALSE(contains(m.bytes, as_u8)) << message_kind_name(m.kind);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Server side.

std::vector<Candidate> synthetic_pool() {
  using Bits = std::vector<std::uint8_t>;
  const DocMask x = pack(Bits{1, 1, 1, 1, 0, 0, 0, 0});
  const DocMask y = pack(Bits{0, 0, 0, 0, 1, 1, 1, 1});
  return {{0, 1, 0.9, x}, {0, 2, 0.8, y}, {1, 7, 0.85, x}, {1, 8, 0.7, y}, {1, 9, 0.6, x}};
}

TEST(ServerSelect, OneSiloZeroLambdaIsTopK) {
  const auto pool = synthetic_pool();
  SelectionConfig cfg;
  cfg.k_prime = 2;
  cfg.lambda_ol = 0.0;
  const auto sel = server_select(std::span(pool).first(2), cfg);
  ASSERT_EQ(sel.size(), 2u);
  EXPECT_EQ(sel[0].doc_id, 1u);
  EXPECT_EQ(sel[1].doc_id, 2u);
}

TEST(ServerSelect, IdenticalMasksAcrossSilosConflict) {
  const auto pool = synthetic_pool();
  SelectionConfig cfg;
  cfg.k_prime = 3;
  cfg.lambda_ol = 50.0;
  const auto sel = server_select(pool, cfg);
  std::vector<SelectionCandidate> sc;
  for (const Candidate& c : pool) sc.push_back({c.score, c.mask});
  std::vector<std::size_t> greedy_idx;
  for (const Candidate& s : sel) {
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i] == s) greedy_idx.push_back(i);
    }
  }
  const auto brute = brute_force_select(sc, cfg);
  EXPECT_NEAR(objective(greedy_idx, sc, cfg), objective(brute, sc, cfg), 1e-12);
  std::set<std::vector<std::uint8_t>> classes;
  for (std::size_t i = 0; i + 1 < sel.size(); ++i) {
    // Every pick but the forced last one is from a fresh mask class.
    EXPECT_TRUE(classes.insert({sel[i].mask.packed().begin(), sel[i].mask.packed().end()}).second);
  }
  EXPECT_EQ(sel[0].doc_id, 1u);
  EXPECT_EQ(sel[1].doc_id, 2u);
}

TEST(ServerSelect, HighThresholdSelectsNothing) {
  const auto pool = synthetic_pool();
  SelectionConfig cfg;
  cfg.tau = 0.95;
  EXPECT_TRUE(server_select(pool, cfg).empty());
}

TEST(ServerAggregate, SingleFullMaskIsDelta) {
  std::mt19937_64 rng(2);
  AdapterStore store;
  store.adapters[{0, 0}] = oracle::random_adapter(8, 2, rng);
  store.bindings[{0, 5}] = 0;
  const std::vector<Candidate> sel{{0, 5, 0.7, DocMask::full(8)}};
  EXPECT_LT(oracle::rel_frobenius(server_aggregate(sel, store, Rescale::kOff),
                                  oracle::to_dense(delta_weight(store.adapters[{0, 0}]))),
            1e-15);
}

TEST(ServerAggregate, SharedClusterContributesPerDocument) {
  std::mt19937_64 rng(3);
  AdapterStore store;
  store.adapters[{0, 1}] = oracle::random_adapter(10, 3, rng);
  store.adapters[{2, 0}] = oracle::random_adapter(10, 3, rng);
  store.bindings[{0, 5}] = 1;
  store.bindings[{0, 6}] = 1;
  store.bindings[{2, 5}] = 0;
  const std::vector<Candidate> sel{{0, 5, 0.9, oracle::random_mask(10, rng)},
                                   {0, 6, 0.6, oracle::random_mask(10, rng)},
                                   {2, 5, 0.5, oracle::random_mask(10, rng)}};
  const std::vector<double> w = normalize_weights(std::vector<double>{0.9, 0.6, 0.5});
  std::vector<oracle::DenseEntry> de{{w[0], sel[0].mask, &store.adapters[{0, 1}]},
                                     {w[1], sel[1].mask, &store.adapters[{0, 1}]},
                                     {w[2], sel[2].mask, &store.adapters[{2, 0}]}};
  for (bool on : {false, true}) {
    EXPECT_LT(oracle::rel_frobenius(server_aggregate(sel, store, on ? Rescale::kOn : Rescale::kOff),
                                    oracle::merge(de, on)),
              1e-12);
  }
}

TEST(ServerAggregate, MissingAdapterIsAProtocolError) {
  AdapterStore store;
  const std::vector<Candidate> sel{{0, 5, 0.7, DocMask::full(8)}};
  EXPECT_THROW(server_aggregate(sel, store, Rescale::kOff), ProtocolError);
}

// ---------------------------------------------------------------------------
// Online stage.

TEST(RunQuery, SingleSiloAnswersItsFact) {
  const World& w = world();
  const Query& q = w.corpus.queries[0];
  std::vector<Document> docs;
  for (const Document& d : w.corpus.documents) {
    if (d.doc_id == q.doc_id) docs.push_back(d);
  }
  SiloConfig sc = w.silo_cfg;
  sc.adapter.epochs = 60;
  sc.mask.epochs = 50;
  const std::vector<SiloState> one{silo_offline(w.model, 0, docs, sc)};
  QueryConfig qc = w.cfg.query_config();
  const QueryResult r = run_query(w.model, one, q.tokens, qc);
  EXPECT_EQ(r.answer, q.answer);
  ASSERT_EQ(r.selected.size(), 1u);
  EXPECT_EQ(r.selected[0].doc_id, q.doc_id);
}

TEST(RunQuery, ThresholdAboveAllScoresFallsBackToBaseModel) {
  const World& w = world();
  QueryConfig qc = w.cfg.query_config();
  qc.selection.tau = 1.5;
  for (const Query& q : w.corpus.queries) {
    const QueryResult r = run_query(w.model, w.silos, q.tokens, qc);
    EXPECT_TRUE(r.selected.empty());
    EXPECT_EQ(r.comm.adapter_upload, 0u);
    EXPECT_EQ(r.comm.adapter_request, 0u);
    EXPECT_EQ(r.answer, generate(w.model, Matrix(w.model.d(), w.model.d()), q.tokens, 4));
  }
}

TEST(RunQuery, RepeatedQueryIsIdentical) {
  const World& w = world();
  const QueryConfig qc = w.cfg.query_config();
  for (const Query& q : w.corpus.queries) {
    const QueryResult a = run_query(w.model, w.silos, q.tokens, qc);
    const QueryResult b = run_query(w.model, w.silos, q.tokens, qc);
    EXPECT_EQ(a.answer, b.answer);
    EXPECT_EQ(a.comm, b.comm);
    EXPECT_EQ(a.selected, b.selected);
    ASSERT_EQ(a.transcript.size(), b.transcript.size());
    for (std::size_t i = 0; i < a.transcript.size(); ++i) {
      EXPECT_EQ(a.transcript[i].bytes, b.transcript[i].bytes);
    }
  }
}

// Conservation, accounting and the upload bound, per query.
TEST(RunQuery, AccountingInvariants) {
  const World& w = world();
  QueryConfig qc = w.cfg.query_config();
  const std::size_t adapter_payload = 2 * w.model.d() * w.cfg.rank * 4;
  for (std::size_t k = 1; k <= 5; ++k) {
    qc.k = k;
    for (const Query& q : w.corpus.queries) {
      const QueryResult r = run_query(w.model, w.silos, q.tokens, qc);
      std::vector<Candidate> union_c;
      std::size_t cand_bytes = 0;
      for (const SiloState& s : w.silos) {
        const auto c = silo_candidates(s, q.tokens, k);
        cand_bytes += candidate_upload_size(c.size(), s.d());
        // The server sees scores at wire precision.
        const CandidateUpload up =
            decode_candidate_upload(encode(CandidateUpload{s.silo_id, s.d(), c}));
        union_c.insert(union_c.end(), up.candidates.begin(), up.candidates.end());
      }
      for (const Candidate& sel : r.selected) {
        EXPECT_NE(std::find(union_c.begin(), union_c.end(), sel), union_c.end());
      }
      EXPECT_EQ(r.comm.candidate_upload, cand_bytes);
      EXPECT_EQ(r.comm.broadcast, 4 + 4 * q.tokens.size());
      EXPECT_EQ(r.comm.total(), r.comm.broadcast + r.comm.candidate_upload +
                                    r.comm.adapter_request + r.comm.adapter_upload);
      std::size_t params = 0, adapters = 0;
      for (const SentMessage& m : r.transcript) {
        if (m.kind != MessageKind::kAdapterUpload) continue;
        const AdapterUpload up = decode_adapter_upload(m.bytes);
        std::set<std::uint32_t> keys;
        for (const auto& [key, ad] : up.adapters) {
          EXPECT_TRUE(keys.insert(key).second);
          params += 2 * ad.d() * ad.r() * 4;
          ++adapters;
        }
        for (const auto& [doc, key] : up.bindings) EXPECT_TRUE(keys.count(key));
      }
      EXPECT_LE(adapters, qc.selection.k_prime);
      EXPECT_LE(params, qc.selection.k_prime * adapter_payload);
      EXPECT_EQ(adapters + r.comm.adapter_dedup_hits, r.selected.size());
    }
  }
}

TEST(RunQuery, CacheSkipsAdaptersAlreadyHeld) {
  const World& w = world();
  const QueryConfig qc = w.cfg.query_config();
  const Query& q = w.corpus.queries[2];
  AdapterStore cache;
  const QueryResult first = run_query(w.model, w.silos, q.tokens, qc, &cache);
  const QueryResult second = run_query(w.model, w.silos, q.tokens, qc, &cache);
  EXPECT_EQ(first.answer, second.answer);
  EXPECT_EQ(second.comm.adapter_upload, 0u);
  EXPECT_EQ(second.comm.adapter_dedup_hits, second.selected.size());
  EXPECT_EQ(first.answer, run_query(w.model, w.silos, q.tokens, qc).answer);
}

TEST(RunQuery, SelectionOffAggregatesByScore) {
  const World& w = world();
  QueryConfig qc = w.cfg.query_config();
  qc.use_selection = false;
  qc.max_aggregate = 4;
  const QueryResult r = run_query(w.model, w.silos, w.corpus.queries[0].tokens, qc);
  ASSERT_EQ(r.selected.size(), 4u);
  for (std::size_t i = 1; i < r.selected.size(); ++i) {
    EXPECT_GE(r.selected[i - 1].score, r.selected[i].score);
  }
}

TEST(RunQuery, Errors) {
  const World& w = world();
  QueryConfig qc = w.cfg.query_config();
  EXPECT_THROW(run_query(w.model, w.silos, TokenSeq{}, qc), ArgumentError);
  qc.k = 0;
  EXPECT_THROW(run_query(w.model, w.silos, TokenSeq{0, 5}, qc), ArgumentError);
}

// ---------------------------------------------------------------------------
// Baseline.

World naive_world() {
  ExperimentConfig cfg = small_config();
  cfg.clustering = false;
  cfg.masks = false;
  return make_world(cfg);
}

TEST(RunQueryNaive, SingleSiloTopOneIsSingleAdapterRag) {
  const World w = naive_world();
  const SiloState& s = w.silos.front();
  const std::vector<SiloState> one{s};
  for (const Query& q : w.corpus.queries) {
    const auto top = silo_candidates(s, q.tokens, 1);
    const Matrix delta = delta_weight(s.adapter_for(top[0].doc_id));
    const TokenSeq expected = generate(w.model, delta, q.tokens, 4);
    for (NaiveUpload mode : {NaiveUpload::kPreAveraged, NaiveUpload::kPerDocument}) {
      EXPECT_EQ(run_query_naive(w.model, one, q.tokens, 1, mode).answer, expected);
    }
  }
}

TEST(RunQueryNaive, UploadBytesArithmetic) {
  const World w = naive_world();
  const std::size_t adapter = encoded_adapter_size(w.model.d(), w.cfg.rank);
  const Query& q = w.corpus.queries[0];
  for (std::size_t k = 1; k <= 4; ++k) {
    std::size_t per_doc = 0, averaged = 0;
    for (const SiloState& s : w.silos) {
      const std::size_t n = std::min(k, s.corpus.size());
      per_doc += 12 + n * (8 + 4 + adapter);
      averaged += 12 + n * 8 + 4 + adapter;
    }
    EXPECT_EQ(run_query_naive(w.model, w.silos, q.tokens, k, NaiveUpload::kPerDocument)
                  .comm.adapter_upload,
              per_doc);
    EXPECT_EQ(run_query_naive(w.model, w.silos, q.tokens, k, NaiveUpload::kPreAveraged)
                  .comm.adapter_upload,
              averaged);
  }
  EXPECT_EQ(2 * w.model.d() * w.cfg.rank * 4 + 14, adapter);
}

TEST(RunQueryNaive, RequiresPerDocumentSilos) {
  const World& w = world();
  EXPECT_THROW(run_query_naive(w.model, w.silos, w.corpus.queries[0].tokens, 1),
               ArgumentError);
}

TEST(AverageAdapters, FactorWiseMean) {
  std::mt19937_64 rng(4);
  const AdapterPair a = oracle::random_adapter(5, 2, rng);
  const AdapterPair b = oracle::random_adapter(5, 2, rng);
  const AdapterPair m = average_adapters(std::vector<AdapterPair>{a, b});
  for (std::size_t i = 0; i < a.a.size(); ++i) {
    EXPECT_NEAR(m.a.values()[i], 0.5 * (a.a.values()[i] + b.a.values()[i]), 1e-15);
  }
  EXPECT_THROW(average_adapters(std::vector<AdapterPair>{}), ArgumentError);
  EXPECT_THROW(average_adapters(std::vector<AdapterPair>{a, oracle::random_adapter(6, 2, rng)}),
               ShapeError);
}

// ---------------------------------------------------------------------------
// Storage.

TEST(StorageReport, Arithmetic) {
  const StorageReport c8 = storage_report(80, 10, 64, 4);
  EXPECT_EQ(c8.adapter_bytes, 20480u);
  EXPECT_EQ(c8.baseline_per_doc_bytes, 163840u);
  EXPECT_EQ(c8.mask_bytes, 640u);
  EXPECT_DOUBLE_EQ(static_cast<double>(c8.adapter_bytes) / c8.baseline_per_doc_bytes, 0.125);
  EXPECT_NEAR(static_cast<double>(c8.mask_bytes) / c8.baseline_per_doc_bytes, 0.0039, 1e-4);
  const StorageReport c10 = storage_report(80, 8, 64, 4);
  EXPECT_EQ(c10.total_bytes, 16384u + 640u);
  EXPECT_NEAR(static_cast<double>(c10.total_bytes) / c10.baseline_per_doc_bytes, 0.1039, 1e-4);
}

TEST(StorageReport, MatchesSiloLayout) {
  for (const SiloState& s : world().silos) {
    const StorageReport r = storage_report(s);
    EXPECT_EQ(r.adapter_bytes, s.adapters.size() * 2 * s.d() * s.r() * 4);
    EXPECT_EQ(r.mask_bytes, s.masks.size() * packed_size(s.d()));
    EXPECT_EQ(r.total_bytes, r.adapter_bytes + r.mask_bytes);
  }
}

}  // namespace
}  // namespace mosaic
