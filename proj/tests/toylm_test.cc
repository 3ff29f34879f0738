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

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "mosaic/corpus.h"
#include "mosaic/errors.h"
#include "mosaic/toylm.h"
#include "oracles.h"

namespace mosaic {
namespace {

struct Fixture {
  Corpus corpus;
  ToyLM model;
  std::vector<AugmentedDoc> aug;
};

Fixture make_fixture(std::size_t topics, std::size_t facts, std::uint64_t seed) {
  CorpusOptions co;
  co.num_topics = topics;
  co.facts_per_topic = facts;
  co.seed = seed;
  Corpus corpus = gen_corpus(co);
  ToyLM::Options mo;
  mo.seed = seed + 100;
  ToyLM model(mo);
  std::vector<AugmentedDoc> aug;
  for (const Document& doc : corpus.documents) {
    aug.push_back(augment(doc, 2, 2, seed, corpus.templates));
  }
  return {std::move(corpus), std::move(model), std::move(aug)};
}

AdapterTrainConfig trained_config() {
  AdapterTrainConfig cfg;
  cfg.epochs = 60;
  cfg.seed = 3;
  return cfg;
}

// ---------------------------------------------------------------------------
// Augmentation.

TEST(Augment, MinimalIsCanonicalTemplate) {
  const Fixture f = make_fixture(1, 1, 1);
  const Document& doc = f.corpus.documents[0];
  const AugmentedDoc a = augment(doc, 1, 0, 9, f.corpus.templates);
  ASSERT_EQ(a.rewrites.size(), 1u);
  EXPECT_TRUE(a.qa_pairs.empty());
  EXPECT_EQ(a.source_doc_id, doc.doc_id);
  // Context first, then subject, relation, object.
  const Triple& t = doc.triples[0];
  const TokenSeq& r = a.rewrites[0];
  TokenSeq tail{t.subject, t.relation};
  tail.insert(tail.end(), t.object.begin(), t.object.end());
  ASSERT_GE(r.size(), tail.size());
  EXPECT_TRUE(std::equal(tail.begin(), tail.end(), r.end() - static_cast<long>(tail.size())));
  EXPECT_EQ(r.front(), doc.tokens.front());
}

TEST(Augment, QaAnswerIsTheObject) {
  const Fixture f = make_fixture(1, 1, 2);
  const Document& doc = f.corpus.documents[0];
  const AugmentedDoc a = augment(doc, 1, 1, 9, f.corpus.templates);
  ASSERT_EQ(a.qa_pairs.size(), 1u);
  EXPECT_EQ(a.qa_pairs[0].answer, doc.triples[0].object);
  EXPECT_EQ(a.qa_pairs[0].question, question_for(doc.triples[0], f.corpus.templates));
}

TEST(Augment, DeterministicForFixedSeed) {
  const Fixture f = make_fixture(2, 2, 3);
  for (const Document& doc : f.corpus.documents) {
    EXPECT_EQ(augment(doc, 3, 2, 44, f.corpus.templates),
              augment(doc, 3, 2, 44, f.corpus.templates));
  }
}

TEST(Augment, Errors) {
  const Fixture f = make_fixture(1, 1, 4);
  Document bare = f.corpus.documents[0];
  bare.triples.clear();
  EXPECT_THROW(augment(bare, 1, 1, 0, f.corpus.templates), AugmentationError);
  EXPECT_NO_THROW(augment(bare, 2, 0, 0, f.corpus.templates));
  EXPECT_THROW(augment(f.corpus.documents[0], 0, 0, 0, f.corpus.templates), ArgumentError);
}

TEST(Augment, SequencesStayInVocabulary) {
  const Fixture f = make_fixture(3, 3, 5);
  for (const AugmentedDoc& a : f.aug) {
    for (const TokenSeq& s : training_sequences(a, f.model.end_token())) {
      EXPECT_GE(s.size(), 2u);
      for (Token t : s) EXPECT_LT(t, f.model.vocab_size());
      EXPECT_EQ(s.back(), f.model.end_token());
    }
  }
}

// ---------------------------------------------------------------------------
// Forward pass.

TEST(NextTokenLoss, ZeroModelIsUniform) {
  std::mt19937_64 rng(1);
  const ToyLM model(oracle::random_matrix(8, 50, rng), Matrix(8, 8), 1);
  const TokenSeq seq{4, 9, 17, 3};
  EXPECT_NEAR(next_token_loss(model, Matrix(8, 8), seq), std::log(50.0), 1e-12);
}

TEST(NextTokenLoss, ContinuousInDelta) {
  const Fixture f = make_fixture(1, 2, 6);
  const TokenSeq& seq = f.corpus.documents[0].tokens;
  const Matrix zero(f.model.d(), f.model.d());
  Matrix eps(f.model.d(), f.model.d(), 1e-7);
  const double diff = std::abs(next_token_loss(f.model, eps, seq) -
                               next_token_loss(f.model, zero, seq));
  EXPECT_LT(diff, 1e-4);
  EXPECT_GT(diff, 0.0);
}

TEST(NextTokenLoss, MatchesStraightLineForwardPass) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const ToyLM model(oracle::random_matrix(6, 20, rng, 0.7),
                      oracle::random_matrix(6, 6, rng, 0.5), 1);
    const Matrix delta = oracle::random_matrix(6, 6, rng, 0.1);
    std::uniform_int_distribution<Token> tok(0, 19);
    TokenSeq seq(2 + trial);
    for (Token& t : seq) t = tok(rng);
    EXPECT_NEAR(next_token_loss(model, delta, seq),
                oracle::next_token_loss(model, delta, seq), 1e-12);
  }
}

TEST(NextTokenLoss, Errors) {
  const Fixture f = make_fixture(1, 1, 8);
  const Matrix zero(f.model.d(), f.model.d());
  EXPECT_THROW(next_token_loss(f.model, zero, TokenSeq{3, 256}), VocabularyError);
  EXPECT_THROW(next_token_loss(f.model, zero, TokenSeq{3}), ArgumentError);
  EXPECT_THROW(next_token_loss(f.model, Matrix(3, 3), TokenSeq{3, 4}), ShapeError);
}

TEST(NextTokenDistribution, SumsToOne) {
  const Fixture f = make_fixture(2, 2, 9);
  std::mt19937_64 rng(9);
  const Matrix delta = oracle::random_matrix(f.model.d(), f.model.d(), rng, 0.3);
  const TokenSeq& seq = f.corpus.documents[1].tokens;
  for (std::size_t t = 1; t <= seq.size(); ++t) {
    const auto p = next_token_distribution(f.model, delta, std::span(seq).first(t));
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(ToyLM, DeterministicFromSeed) {
  ToyLM::Options o;
  o.seed = 42;
  const ToyLM a(o), b(o);
  EXPECT_EQ(a.embed(), b.embed());
  EXPECT_EQ(a.w0(), b.w0());
  EXPECT_TRUE(a.embed().all_finite());
  o.seed = 43;
  EXPECT_NE(ToyLM(o).embed(), a.embed());
}

// ---------------------------------------------------------------------------
// Adapter training.

TEST(TrainAdapter, ZeroEpochsReturnsInitialization) {
  const Fixture f = make_fixture(1, 2, 10);
  AdapterTrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 5;
  const AdapterPair ad = train_adapter(f.model, f.aug, cfg);
  EXPECT_EQ(ad, init_adapter(f.model.d(), cfg));
  EXPECT_EQ(delta_weight(ad), Matrix(f.model.d(), f.model.d()));
  EXPECT_GT(ad.a.frobenius_norm(), 0.0);
}

TEST(TrainAdapter, ThreeEpochsReduceLossOnTwoDocCluster) {
  const Fixture f = make_fixture(1, 2, 11);
  ASSERT_EQ(f.aug.size(), 2u);
  AdapterTrainConfig cfg;  // three epochs
  cfg.seed = 5;
  const Matrix zero(f.model.d(), f.model.d());
  const double before = corpus_loss(f.model, zero, f.aug);
  const AdapterPair ad = train_adapter(f.model, f.aug, cfg);
  EXPECT_LT(corpus_loss(f.model, delta_weight(ad), f.aug), before);
}

TEST(TrainAdapter, DeterministicAndLeavesBaseFrozen) {
  const Fixture f = make_fixture(1, 2, 12);
  const Matrix embed = f.model.embed(), w0 = f.model.w0();
  AdapterTrainConfig cfg;
  cfg.seed = 8;
  const AdapterPair a = train_adapter(f.model, f.aug, cfg);
  const AdapterPair b = train_adapter(f.model, f.aug, cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(f.model.embed(), embed);
  EXPECT_EQ(f.model.w0(), w0);
}

TEST(TrainAdapter, Errors) {
  const Fixture f = make_fixture(1, 1, 13);
  EXPECT_THROW(train_adapter(f.model, std::vector<AugmentedDoc>{}, AdapterTrainConfig{}),
               ArgumentError);
  AdapterTrainConfig big;
  big.r = f.model.d() + 1;
  EXPECT_THROW(train_adapter(f.model, f.aug, big), ArgumentError);
}

// ---------------------------------------------------------------------------
// Mask training.

TEST(TrainMask, HugeSparsityCollapsesToForcedRow) {
  const Fixture f = make_fixture(1, 2, 14);
  const AdapterPair ad = train_adapter(f.model, f.aug, trained_config());
  MaskTrainConfig cfg;
  cfg.lambda_l1 = 1e3;
  const MaskTrainResult res = train_mask(f.model, ad, f.aug[0], cfg);
  EXPECT_EQ(popcount(res.mask), 1u);
  EXPECT_TRUE(res.forced_row);
}

TEST(TrainMask, NoEpochsKeepsEveryRow) {
  const Fixture f = make_fixture(1, 2, 15);
  const AdapterPair ad = train_adapter(f.model, f.aug, trained_config());
  MaskTrainConfig cfg;
  cfg.epochs = 0;
  const MaskTrainResult res = train_mask(f.model, ad, f.aug[0], cfg);
  EXPECT_EQ(res.mask, DocMask::full(f.model.d()));
  EXPECT_FALSE(res.forced_row);
  EXPECT_EQ(res.next_loss_history.size(), 1u);
}

TEST(TrainMask, SparsityPenaltyDoesNotReduceSparsity) {
  const Fixture f = make_fixture(2, 2, 16);
  AdapterTrainConfig acfg = trained_config();
  const AdapterPair ad = train_adapter(f.model, f.aug, acfg);
  MaskTrainConfig cfg;
  cfg.alpha = 8.0;
  cfg.lr = 2.0;
  cfg.epochs = 50;
  for (const AugmentedDoc& doc : f.aug) {
    const MaskTrainResult dense = train_mask(f.model, ad, doc, cfg);
    MaskTrainConfig sparse_cfg = cfg;
    sparse_cfg.lambda_l1 = 0.01;
    const MaskTrainResult sparse = train_mask(f.model, ad, doc, sparse_cfg);
    EXPECT_LE(popcount(sparse.mask), popcount(dense.mask));
    EXPECT_LT(dense.next_loss_history.back(), dense.next_loss_history.front());
    EXPECT_EQ(dense.next_loss_history.size(), cfg.epochs + 1);
  }
}

TEST(TrainMask, AdapterStaysFrozen) {
  const Fixture f = make_fixture(1, 1, 17);
  const AdapterPair ad = train_adapter(f.model, f.aug, trained_config());
  const AdapterPair copy = ad;
  MaskTrainConfig cfg;
  cfg.lambda_l1 = 0.01;
  const MaskTrainResult a = train_mask(f.model, ad, f.aug[0], cfg);
  EXPECT_EQ(ad, copy);
  EXPECT_EQ(a.mask, train_mask(f.model, ad, f.aug[0], cfg).mask);
}

TEST(MaskConfig, Validation) {
  MaskTrainConfig cfg;
  cfg.alpha = 0.0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = MaskTrainConfig{};
  cfg.lambda_l1 = -1.0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = MaskTrainConfig{};
  cfg.lr = 0.0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
}

TEST(Binarize, ThresholdAndRepair) {
  bool forced = true;
  EXPECT_EQ(binarize_mask(std::vector<double>{0.3, -0.1, 0.0, 2.0}, &forced),
            pack(std::vector<std::uint8_t>{1, 0, 0, 1}));
  EXPECT_FALSE(forced);
  EXPECT_EQ(binarize_mask(std::vector<double>{-3.0, -0.5, -0.5, -1.0}, &forced),
            pack(std::vector<std::uint8_t>{0, 1, 0, 0}));
  EXPECT_TRUE(forced);
}

// ---------------------------------------------------------------------------
// Gradients.

TEST(SparsityGradient, ClosedFormAtZero) {
  MaskTrainConfig cfg;
  cfg.lambda_l1 = 0.01;
  cfg.alpha = 4.0;
  const auto g = sparsity_gradient(std::vector<double>{0.0, 0.0}, cfg);
  EXPECT_NEAR(g[0], 0.01, 1e-15);
  EXPECT_NEAR(g[1], 0.01, 1e-15);
}

// sigma'(x) = sigma'(-x): negating the logits leaves the sparsity gradient
// unchanged coordinate by coordinate.
TEST(SparsityGradient, EvenInTheLogits) {
  MaskTrainConfig cfg;
  cfg.lambda_l1 = 0.3;
  cfg.alpha = 1.0;
  const std::vector<double> m{-2.0, -0.5, 0.0, 0.25, 1.5};
  std::vector<double> neg = m;
  for (double& v : neg) v = -v;
  const auto g = sparsity_gradient(m, cfg), gn = sparsity_gradient(neg, cfg);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(g[i], gn[i], 1e-15);
}

TEST(GradMaskLogits, MatchesCentralDifferences) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const ToyLM model(oracle::random_matrix(6, 24, rng, 0.6),
                      oracle::random_matrix(6, 6, rng, 0.3), 1);
    const AdapterPair ad = oracle::random_adapter(6, 2, rng);
    AugmentedDoc doc;
    doc.rewrites = {{3, 7, 11, 2, 19}, {5, 6, 7}};
    doc.qa_pairs = {{{0, 9, 10}, {12, 13}}};
    std::vector<double> logits(6);
    for (double& v : logits) v = n(rng);
    MaskTrainConfig cfg;
    cfg.alpha = 1.0 + trial % 4;
    cfg.lambda_l1 = 0.01 * (trial % 3);
    const std::vector<double> g = grad_mask_logits(model, ad, doc, logits, cfg);
    const double h = 1e-5;
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
      std::vector<double> up = logits, dn = logits;
      up[j] += h;
      dn[j] -= h;
      const double fd = (mask_objective(model, ad, doc, up, cfg) -
                         mask_objective(model, ad, doc, dn, cfg)) / (2 * h);
      num += (g[j] - fd) * (g[j] - fd);
      den += fd * fd;
    }
    EXPECT_LT(std::sqrt(num) / std::max(std::sqrt(den), 1e-12), 1e-4) << "fixture " << trial;
  }
}

TEST(MaskObjective, IsNextLossPlusPenalty) {
  std::mt19937_64 rng(22);
  const ToyLM model(oracle::random_matrix(5, 16, rng), oracle::random_matrix(5, 5, rng), 1);
  const AdapterPair ad = oracle::random_adapter(5, 2, rng);
  AugmentedDoc doc;
  doc.rewrites = {{3, 4, 5, 6}};
  const std::vector<double> logits{0.1, -0.2, 0.3, 0.9, -1.0};
  MaskTrainConfig cfg;
  cfg.lambda_l1 = 0.05;
  double l1 = 0.0;
  for (double v : logits) l1 += 1.0 / (1.0 + std::exp(-cfg.alpha * v));
  EXPECT_NEAR(mask_objective(model, ad, doc, logits, cfg),
              soft_mask_next_loss(model, ad, doc, logits, cfg.alpha) + 0.05 * l1, 1e-12);
}

// ---------------------------------------------------------------------------
// Decoding.

TEST(Generate, UniformLogitsPickLowestIndex) {
  const ToyLM model(Matrix(4, 10), Matrix(4, 4), 9);
  EXPECT_EQ(generate(model, Matrix(4, 4), TokenSeq{3, 5}, 3), (TokenSeq{0, 0, 0}));
  const ToyLM stops(Matrix(4, 10), Matrix(4, 4), 0);
  EXPECT_TRUE(generate(stops, Matrix(4, 4), TokenSeq{3}, 3).empty());
}

TEST(Generate, AnswersTrainedSingleFact) {
  const Fixture f = make_fixture(1, 1, 23);
  const AdapterPair ad = train_adapter(f.model, f.aug, trained_config());
  const Query& q = f.corpus.queries[0];
  const Matrix delta = delta_weight(ad);
  EXPECT_EQ(generate(f.model, delta, q.tokens, 4), q.answer);
  EXPECT_EQ(generate(f.model, delta, q.tokens, 4), generate(f.model, delta, q.tokens, 4));
  EXPECT_NE(generate(f.model, Matrix(f.model.d(), f.model.d()), q.tokens, 4), q.answer);
}

TEST(Generate, Errors) {
  const ToyLM model(Matrix(4, 10), Matrix(4, 4), 9);
  EXPECT_THROW(generate(model, Matrix(4, 4), TokenSeq{}, 3), ArgumentError);
  EXPECT_THROW(generate(model, Matrix(4, 4), TokenSeq{10}, 3), VocabularyError);
}

}  // namespace
}  // namespace mosaic
