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

#ifndef MOSAIC_TOYLM_H_
#define MOSAIC_TOYLM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mosaic/document.h"
#include "mosaic/lowrank.h"
#include "mosaic/maskcodec.h"
#include "mosaic/matrix.h"

namespace mosaic {

// A frozen one-layer next-token model standing in for the base LLM.
//
// For a prefix x_<t the context vector h is the mean of the embedding columns
// of x_<t; the adapted layer produces hidden = (w0 + delta) h and the logits
// are embed^T hidden. Only `delta` is ever trained; embed and w0 are fixed at
// construction from the seed.
class ToyLM {
 public:
  struct Options {
    std::size_t vocab_size = 256;
    std::size_t d = 64;
    std::uint64_t seed = 0;
    Token end_token = 1;
    // Standard deviation of embedding entries and of w0 entries (the latter
    // divided by sqrt(d)).
    double embed_scale = 0.5;
    double base_scale = 0.5;
  };

  explicit ToyLM(const Options& options);
  // Direct construction for fixtures; throws ShapeError on mismatch.
  ToyLM(Matrix embed, Matrix w0, Token end_token, std::uint64_t seed = 0);

  std::size_t vocab_size() const { return embed_.cols(); }
  std::size_t d() const { return embed_.rows(); }
  std::uint64_t seed() const { return seed_; }
  Token end_token() const { return end_token_; }
  const Matrix& embed() const { return embed_; }
  const Matrix& w0() const { return w0_; }

 private:
  Matrix embed_;  // d x V
  Matrix w0_;     // d x d
  Token end_token_;
  std::uint64_t seed_;
};

struct QaPair {
  TokenSeq question;
  TokenSeq answer;

  friend bool operator==(const QaPair&, const QaPair&) = default;
};

struct AugmentedDoc {
  std::vector<TokenSeq> rewrites;
  std::vector<QaPair> qa_pairs;
  DocId source_doc_id = 0;

  friend bool operator==(const AugmentedDoc&, const AugmentedDoc&) = default;
};

// Tokens the template resampler may insert.
struct TemplateVocab {
  Token question = 0;
  std::vector<Token> fillers;
};

// Rewrite 0 is the canonical template (context tokens, then S R O per
// triple); later rewrites resample filler placement and context order.
// QA pair j asks about triple j mod |triples| with answer = object tokens.
AugmentedDoc augment(const Document& doc, std::size_t n, std::size_t m,
                     std::uint64_t seed, const TemplateVocab& vocab);

// The canonical question for a triple: [question, subject, relation].
TokenSeq question_for(const Triple& triple, const TemplateVocab& vocab);

// Rewrites and question++answer, each terminated by the end token.
std::vector<TokenSeq> training_sequences(const AugmentedDoc& doc,
                                         Token end_token);

// Softmax over the vocabulary for the token following `context`.
std::vector<double> next_token_distribution(const ToyLM& model,
                                            const Matrix& delta,
                                            std::span<const Token> context);

// Mean over t >= 1 of -log P(x_t | x_<t) under w0 + delta.
double next_token_loss(const ToyLM& model, const Matrix& delta,
                       std::span<const Token> seq);

struct AdapterTrainConfig {
  std::size_t r = 4;
  std::size_t epochs = 3;
  double lr = 0.1;
  std::uint64_t seed = 0;
  double init_scale = 0.02;
};

// b = 0, a ~ N(0, init_scale^2) from the seed.
AdapterPair init_adapter(std::size_t d, const AdapterTrainConfig& cfg);

// Plain gradient descent, one step per training sequence in fixed order,
// `epochs` passes over all rewrites and QA pairs of `docs`.
AdapterPair train_adapter(const ToyLM& model,
                          std::span<const AugmentedDoc> docs,
                          const AdapterTrainConfig& cfg);

// Sum of next_token_loss over every training sequence of `docs`.
double corpus_loss(const ToyLM& model, const Matrix& delta,
                   std::span<const AugmentedDoc> docs);

struct MaskTrainConfig {
  double alpha = 4.0;
  double lambda_l1 = 0.0;
  std::size_t epochs = 20;
  double lr = 0.05;
  std::uint64_t seed = 0;
  double init_logit = 0.5;

  void validate() const;
};

struct MaskTrainResult {
  std::vector<double> logits;
  DocMask mask;
  // Next-token loss of the soft-masked adapter before each epoch, plus the
  // final value: epochs + 1 entries.
  std::vector<double> next_loss_history;
  bool forced_row = false;
};

// Soft mask s = sigmoid(alpha * logits) gates the rows of b with rescale
// d / sum(s); the objective is the mean next-token loss over the document's
// training sequences plus lambda_l1 * sum(s). The adapter stays frozen.
MaskTrainResult train_mask(const ToyLM& model, const AdapterPair& adapter,
                           const AugmentedDoc& doc, const MaskTrainConfig& cfg);

double soft_mask_next_loss(const ToyLM& model, const AdapterPair& adapter,
                           const AugmentedDoc& doc,
                           std::span<const double> logits, double alpha);
double mask_objective(const ToyLM& model, const AdapterPair& adapter,
                      const AugmentedDoc& doc, std::span<const double> logits,
                      const MaskTrainConfig& cfg);

// Analytic d(mask_objective)/d(logits).
std::vector<double> grad_mask_logits(const ToyLM& model,
                                     const AdapterPair& adapter,
                                     const AugmentedDoc& doc,
                                     std::span<const double> logits,
                                     const MaskTrainConfig& cfg);
// The lambda_l1 term alone: lambda_l1 * alpha * s (1 - s).
std::vector<double> sparsity_gradient(std::span<const double> logits,
                                      const MaskTrainConfig& cfg);

// 1[logit > 0]; an all-zero result is repaired by setting the highest logit
// (lowest index on ties).
DocMask binarize_mask(std::span<const double> logits, bool* forced = nullptr);

// Greedy decoding with lowest-index tie-breaking; stops after the end token
// (not emitted) or max_len tokens.
TokenSeq generate(const ToyLM& model, const Matrix& delta,
                  std::span<const Token> question, std::size_t max_len);

}  // namespace mosaic

#endif  // MOSAIC_TOYLM_H_
