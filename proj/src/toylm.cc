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

#include "mosaic/toylm.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mosaic/errors.h"
#include "mosaic/kernels.h"
#include "mosaic/rng.h"

namespace mosaic {

ToyLM::ToyLM(const Options& options)
    : embed_(options.d, options.vocab_size),
      w0_(options.d, options.d),
      end_token_(options.end_token),
      seed_(options.seed) {
  if (options.d == 0 || options.vocab_size == 0) {
    throw ArgumentError("ToyLM: d and vocab_size must be positive");
  }
  if (options.end_token >= options.vocab_size) {
    throw VocabularyError("ToyLM: end token outside vocabulary");
  }
  std::mt19937_64 rng(derive_seed(options.seed, 0x746f796c6dULL));
  std::normal_distribution<double> embed_dist(0.0, options.embed_scale);
  for (double& v : embed_.values()) v = embed_dist(rng);
  std::normal_distribution<double> base_dist(
      0.0, options.base_scale / std::sqrt(static_cast<double>(options.d)));
  for (double& v : w0_.values()) v = base_dist(rng);
}

ToyLM::ToyLM(Matrix embed, Matrix w0, Token end_token, std::uint64_t seed)
    : embed_(std::move(embed)),
      w0_(std::move(w0)),
      end_token_(end_token),
      seed_(seed) {
  if (w0_.rows() != embed_.rows() || w0_.cols() != embed_.rows()) {
    throw ShapeError("ToyLM: w0 must be d x d with d = embed rows");
  }
  if (end_token_ >= embed_.cols()) {
    throw VocabularyError("ToyLM: end token outside vocabulary");
  }
}

// ---------------------------------------------------------------------------
// Augmentation

namespace {

bool contains(std::span<const Token> xs, Token t) {
  return std::find(xs.begin(), xs.end(), t) != xs.end();
}

TokenSeq context_tokens(const Document& doc, const TemplateVocab& vocab) {
  TokenSeq fact_tokens;
  for (const Triple& t : doc.triples) {
    fact_tokens.push_back(t.subject);
    fact_tokens.push_back(t.relation);
    fact_tokens.insert(fact_tokens.end(), t.object.begin(), t.object.end());
  }
  TokenSeq out;
  for (Token tok : doc.tokens) {
    if (tok == vocab.question || contains(vocab.fillers, tok) ||
        contains(fact_tokens, tok)) {
      continue;
    }
    out.push_back(tok);
  }
  return out;
}

}  // namespace

TokenSeq question_for(const Triple& triple, const TemplateVocab& vocab) {
  return {vocab.question, triple.subject, triple.relation};
}

AugmentedDoc augment(const Document& doc, std::size_t n, std::size_t m,
                     std::uint64_t seed, const TemplateVocab& vocab) {
  if (n < 1) throw ArgumentError("augment: need at least one rewrite");
  if (doc.tokens.empty()) throw ArgumentError("augment: empty document");
  if (m > 0 && doc.triples.empty()) {
    throw AugmentationError("augment: document " + std::to_string(doc.doc_id) +
                            " has no triple to question");
  }
  AugmentedDoc out;
  out.source_doc_id = doc.doc_id;
  const TokenSeq context = context_tokens(doc, vocab);

  TokenSeq canonical;
  if (doc.triples.empty()) {
    canonical = doc.tokens;
  } else {
    canonical = context;
    for (const Triple& t : doc.triples) {
      canonical.push_back(t.subject);
      canonical.push_back(t.relation);
      canonical.insert(canonical.end(), t.object.begin(), t.object.end());
    }
  }
  out.rewrites.push_back(std::move(canonical));

  std::mt19937_64 rng(derive_seed(seed, doc.doc_id));
  std::bernoulli_distribution coin(0.5);
  auto filler = [&]() -> Token {
    std::uniform_int_distribution<std::size_t> pick(0, vocab.fillers.size() - 1);
    return vocab.fillers[pick(rng)];
  };
  auto maybe_filler = [&](TokenSeq& seq) {
    if (!vocab.fillers.empty() && coin(rng)) seq.push_back(filler());
  };

  for (std::size_t k = 1; k < n; ++k) {
    TokenSeq base = doc.triples.empty() ? doc.tokens : context;
    std::shuffle(base.begin(), base.end(), rng);
    TokenSeq rewrite;
    for (Token tok : base) {
      maybe_filler(rewrite);
      rewrite.push_back(tok);
    }
    for (const Triple& t : doc.triples) {
      maybe_filler(rewrite);
      rewrite.push_back(t.subject);
      maybe_filler(rewrite);
      rewrite.push_back(t.relation);
      rewrite.insert(rewrite.end(), t.object.begin(), t.object.end());
    }
    out.rewrites.push_back(std::move(rewrite));
  }

  for (std::size_t j = 0; j < m; ++j) {
    const Triple& t = doc.triples[j % doc.triples.size()];
    TokenSeq q = question_for(t, vocab);
    if (j >= doc.triples.size() && !vocab.fillers.empty()) {
      std::uniform_int_distribution<std::size_t> at(1, q.size() - 1);
      q.insert(q.begin() + static_cast<std::ptrdiff_t>(at(rng)), filler());
    }
    out.qa_pairs.push_back({std::move(q), t.object});
  }
  return out;
}

std::vector<TokenSeq> training_sequences(const AugmentedDoc& doc,
                                         Token end_token) {
  std::vector<TokenSeq> out;
  out.reserve(doc.rewrites.size() + doc.qa_pairs.size());
  for (const TokenSeq& r : doc.rewrites) {
    out.push_back(r);
    out.back().push_back(end_token);
  }
  for (const QaPair& qa : doc.qa_pairs) {
    TokenSeq s = qa.question;
    s.insert(s.end(), qa.answer.begin(), qa.answer.end());
    s.push_back(end_token);
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Forward pass pieces

namespace {

void check_tokens(const ToyLM& model, std::span<const Token> seq) {
  for (Token t : seq) {
    if (t >= model.vocab_size()) {
      throw VocabularyError("token " + std::to_string(t) +
                            " outside vocabulary of size " +
                            std::to_string(model.vocab_size()));
    }
  }
}

void check_delta(const ToyLM& model, const Matrix& delta) {
  if (delta.rows() != model.d() || delta.cols() != model.d()) {
    throw ShapeError("delta must be d x d");
  }
}

void add_embedding(const ToyLM& model, Token tok, std::span<double> acc) {
  const Matrix& e = model.embed();
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += e(i, tok);
}

void matvec(const Matrix& m, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    auto row = m.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

// In-place softmax; returns log-sum-exp of the input.
double softmax_inplace(std::span<double> z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return mx + std::log(sum);
}

// Adds the whole-vocabulary gradient embed (p - e_target) * scale to g.
void add_hidden_grad(const ToyLM& model, std::span<const double> probs,
                     Token target, double scale, std::span<double> g) {
  const Matrix& e = model.embed();
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto row = e.row(i);
    double acc = 0.0;
    for (std::size_t v = 0; v < row.size(); ++v) acc += row[v] * probs[v];
    acc -= row[target];
    g[i] += scale * acc;
  }
}

Matrix add(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  auto o = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  return out;
}

}  // namespace

std::vector<double> next_token_distribution(const ToyLM& model,
                                            const Matrix& delta,
                                            std::span<const Token> context) {
  check_delta(model, delta);
  check_tokens(model, context);
  if (context.empty()) throw ArgumentError("empty context");
  const std::size_t d = model.d();
  std::vector<double> h(d, 0.0), hidden(d), logits(model.vocab_size());
  for (Token t : context) add_embedding(model, t, h);
  for (double& v : h) v /= static_cast<double>(context.size());
  matvec(add(model.w0(), delta), h, hidden);
  kernels::omp::transposed_matvec(model.embed(), hidden, logits);
  softmax_inplace(logits);
  return logits;
}

double next_token_loss(const ToyLM& model, const Matrix& delta,
                       std::span<const Token> seq) {
  check_delta(model, delta);
  check_tokens(model, seq);
  if (seq.size() < 2) throw ArgumentError("next_token_loss: need >= 2 tokens");
  const std::size_t d = model.d();
  const Matrix w = add(model.w0(), delta);
  std::vector<double> sum(d, 0.0), h(d), hidden(d), logits(model.vocab_size());
  double loss = 0.0;
  for (std::size_t t = 1; t < seq.size(); ++t) {
    add_embedding(model, seq[t - 1], sum);
    for (std::size_t i = 0; i < d; ++i) h[i] = sum[i] / static_cast<double>(t);
    matvec(w, h, hidden);
    kernels::omp::transposed_matvec(model.embed(), hidden, logits);
    const double target_logit = logits[seq[t]];
    loss += softmax_inplace(logits) - target_logit;
  }
  return loss / static_cast<double>(seq.size() - 1);
}

double corpus_loss(const ToyLM& model, const Matrix& delta,
                   std::span<const AugmentedDoc> docs) {
  double total = 0.0;
  for (const AugmentedDoc& doc : docs) {
    for (const TokenSeq& s : training_sequences(doc, model.end_token())) {
      total += next_token_loss(model, delta, s);
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Adapter training

AdapterPair init_adapter(std::size_t d, const AdapterTrainConfig& cfg) {
  if (cfg.r < 1 || cfg.r > d) throw ArgumentError("adapter rank outside [1, d]");
  AdapterPair adapter{Matrix(cfg.r, d), Matrix(d, cfg.r)};
  std::mt19937_64 rng(derive_seed(cfg.seed, 0x61646170ULL));
  std::normal_distribution<double> dist(0.0, cfg.init_scale);
  for (double& v : adapter.a.values()) v = dist(rng);
  return adapter;
}

AdapterPair train_adapter(const ToyLM& model,
                          std::span<const AugmentedDoc> docs,
                          const AdapterTrainConfig& cfg) {
  std::vector<TokenSeq> seqs;
  for (const AugmentedDoc& doc : docs) {
    for (TokenSeq& s : training_sequences(doc, model.end_token())) {
      check_tokens(model, s);
      seqs.push_back(std::move(s));
    }
  }
  if (seqs.empty()) throw ArgumentError("train_adapter: empty training set");

  const std::size_t d = model.d(), r = cfg.r;
  AdapterPair adapter = init_adapter(d, cfg);
  std::vector<double> sum(d), h(d), u(r), hidden(d), logits(model.vocab_size());
  std::vector<double> g(d), bt_g(r);
  Matrix grad_a(r, d), grad_b(d, r);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const TokenSeq& seq : seqs) {
      std::fill(sum.begin(), sum.end(), 0.0);
      std::fill(grad_a.values().begin(), grad_a.values().end(), 0.0);
      std::fill(grad_b.values().begin(), grad_b.values().end(), 0.0);
      const double scale = 1.0 / static_cast<double>(seq.size() - 1);
      for (std::size_t t = 1; t < seq.size(); ++t) {
        add_embedding(model, seq[t - 1], sum);
        for (std::size_t i = 0; i < d; ++i) h[i] = sum[i] / static_cast<double>(t);
        matvec(adapter.a, h, u);
        matvec(model.w0(), h, hidden);
        for (std::size_t i = 0; i < d; ++i) {
          auto brow = adapter.b.row(i);
          for (std::size_t k = 0; k < r; ++k) hidden[i] += brow[k] * u[k];
        }
        kernels::omp::transposed_matvec(model.embed(), hidden, logits);
        softmax_inplace(logits);
        std::fill(g.begin(), g.end(), 0.0);
        add_hidden_grad(model, logits, seq[t], scale, g);
        // dL/db = g u^T ; dL/da = (b^T g) h^T
        std::fill(bt_g.begin(), bt_g.end(), 0.0);
        for (std::size_t i = 0; i < d; ++i) {
          auto brow = adapter.b.row(i);
          auto gbrow = grad_b.row(i);
          for (std::size_t k = 0; k < r; ++k) {
            gbrow[k] += g[i] * u[k];
            bt_g[k] += brow[k] * g[i];
          }
        }
        for (std::size_t k = 0; k < r; ++k) {
          auto garow = grad_a.row(k);
          for (std::size_t j = 0; j < d; ++j) garow[j] += bt_g[k] * h[j];
        }
      }
      auto av = adapter.a.values();
      auto gav = grad_a.values();
      for (std::size_t i = 0; i < av.size(); ++i) av[i] -= cfg.lr * gav[i];
      auto bv = adapter.b.values();
      auto gbv = grad_b.values();
      for (std::size_t i = 0; i < bv.size(); ++i) bv[i] -= cfg.lr * gbv[i];
    }
  }
  adapter.validate();
  return adapter;
}

// ---------------------------------------------------------------------------
// Mask training

void MaskTrainConfig::validate() const {
  if (!(alpha > 0.0)) throw ArgumentError("mask config: alpha must be > 0");
  if (!(lambda_l1 >= 0.0)) throw ArgumentError("mask config: lambda_l1 < 0");
  if (!(lr > 0.0)) throw ArgumentError("mask config: lr must be > 0");
}

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct SoftMaskEval {
  double next_loss = 0.0;
  std::vector<double> grad_soft;  // d L_next / d s
};

// Mean next-token loss over the document's sequences with rows of b gated by
// s_j and rescaled by d / sum(s); optionally the gradient with respect to s.
SoftMaskEval eval_soft_mask(const ToyLM& model, const AdapterPair& adapter,
                            std::span<const TokenSeq> seqs,
                            std::span<const double> soft, bool want_grad) {
  const std::size_t d = model.d(), r = adapter.r();
  double soft_sum = 0.0;
  for (double s : soft) soft_sum += s;
  // gate_j = d * s_j / sum(s), formed as a ratio so tiny masks stay finite.
  std::vector<double> gate(d);
  for (std::size_t j = 0; j < d; ++j) {
    gate[j] = static_cast<double>(d) * (soft[j] / soft_sum);
  }

  SoftMaskEval out;
  std::vector<double> gc(d, 0.0);  // sum over positions of g_j c_j
  std::vector<double> sum(d), h(d), u(r), c(d), hidden(d), g(d);
  std::vector<double> logits(model.vocab_size());
  const double seq_scale = 1.0 / static_cast<double>(seqs.size());
  for (const TokenSeq& seq : seqs) {
    std::fill(sum.begin(), sum.end(), 0.0);
    const double scale = seq_scale / static_cast<double>(seq.size() - 1);
    for (std::size_t t = 1; t < seq.size(); ++t) {
      add_embedding(model, seq[t - 1], sum);
      for (std::size_t i = 0; i < d; ++i) h[i] = sum[i] / static_cast<double>(t);
      matvec(adapter.a, h, u);
      matvec(adapter.b, u, c);
      matvec(model.w0(), h, hidden);
      for (std::size_t i = 0; i < d; ++i) hidden[i] += gate[i] * c[i];
      kernels::omp::transposed_matvec(model.embed(), hidden, logits);
      const double target_logit = logits[seq[t]];
      out.next_loss += scale * (softmax_inplace(logits) - target_logit);
      if (want_grad) {
        std::fill(g.begin(), g.end(), 0.0);
        add_hidden_grad(model, logits, seq[t], scale, g);
        for (std::size_t i = 0; i < d; ++i) gc[i] += g[i] * c[i];
      }
    }
  }
  if (want_grad) {
    // hidden_j depends on s through d s_j / S:
    // dL/ds_k = (d / S) (gc_k - sum_j gc_j s_j / S)
    double mixed = 0.0;
    for (std::size_t j = 0; j < d; ++j) mixed += gc[j] * (soft[j] / soft_sum);
    out.grad_soft.resize(d);
    const double lead = static_cast<double>(d) / soft_sum;
    for (std::size_t k = 0; k < d; ++k) {
      out.grad_soft[k] = lead * (gc[k] - mixed);
    }
  }
  return out;
}

std::vector<TokenSeq> checked_sequences(const ToyLM& model,
                                        const AdapterPair& adapter,
                                        const AugmentedDoc& doc,
                                        std::size_t logit_count) {
  adapter.validate();
  if (adapter.d() != model.d()) throw ShapeError("adapter width differs from model");
  if (logit_count != model.d()) throw ShapeError("mask logits must have length d");
  std::vector<TokenSeq> seqs = training_sequences(doc, model.end_token());
  if (seqs.empty()) throw ArgumentError("document has no training sequence");
  for (const TokenSeq& s : seqs) check_tokens(model, s);
  return seqs;
}

std::vector<double> soft_mask(std::span<const double> logits, double alpha) {
  std::vector<double> s(logits.size());
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = sigmoid(alpha * logits[j]);
  return s;
}

}  // namespace

double soft_mask_next_loss(const ToyLM& model, const AdapterPair& adapter,
                           const AugmentedDoc& doc,
                           std::span<const double> logits, double alpha) {
  auto seqs = checked_sequences(model, adapter, doc, logits.size());
  return eval_soft_mask(model, adapter, seqs, soft_mask(logits, alpha), false)
      .next_loss;
}

double mask_objective(const ToyLM& model, const AdapterPair& adapter,
                      const AugmentedDoc& doc, std::span<const double> logits,
                      const MaskTrainConfig& cfg) {
  cfg.validate();
  const auto soft = soft_mask(logits, cfg.alpha);
  auto seqs = checked_sequences(model, adapter, doc, logits.size());
  double l1 = 0.0;
  for (double s : soft) l1 += s;
  return eval_soft_mask(model, adapter, seqs, soft, false).next_loss +
         cfg.lambda_l1 * l1;
}

std::vector<double> sparsity_gradient(std::span<const double> logits,
                                      const MaskTrainConfig& cfg) {
  std::vector<double> out(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    const double s = sigmoid(cfg.alpha * logits[j]);
    out[j] = cfg.lambda_l1 * cfg.alpha * s * (1.0 - s);
  }
  return out;
}

std::vector<double> grad_mask_logits(const ToyLM& model,
                                     const AdapterPair& adapter,
                                     const AugmentedDoc& doc,
                                     std::span<const double> logits,
                                     const MaskTrainConfig& cfg) {
  cfg.validate();
  auto seqs = checked_sequences(model, adapter, doc, logits.size());
  const auto soft = soft_mask(logits, cfg.alpha);
  SoftMaskEval eval = eval_soft_mask(model, adapter, seqs, soft, true);
  std::vector<double> grad = sparsity_gradient(logits, cfg);
  for (std::size_t j = 0; j < grad.size(); ++j) {
    grad[j] += eval.grad_soft[j] * cfg.alpha * soft[j] * (1.0 - soft[j]);
  }
  return grad;
}

DocMask binarize_mask(std::span<const double> logits, bool* forced) {
  std::vector<std::uint8_t> bits(logits.size(), 0);
  bool any = false;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    bits[j] = logits[j] > 0.0;
    any = any || bits[j];
  }
  if (forced != nullptr) *forced = false;
  if (!any && !logits.empty()) {
    const auto best = std::max_element(logits.begin(), logits.end());
    bits[static_cast<std::size_t>(best - logits.begin())] = 1;
    if (forced != nullptr) *forced = true;
  }
  return pack(bits);
}

MaskTrainResult train_mask(const ToyLM& model, const AdapterPair& adapter,
                           const AugmentedDoc& doc, const MaskTrainConfig& cfg) {
  cfg.validate();
  auto seqs = checked_sequences(model, adapter, doc, model.d());
  MaskTrainResult out;
  out.logits.assign(model.d(), cfg.init_logit);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto soft = soft_mask(out.logits, cfg.alpha);
    SoftMaskEval eval = eval_soft_mask(model, adapter, seqs, soft, true);
    out.next_loss_history.push_back(eval.next_loss);
    for (std::size_t j = 0; j < out.logits.size(); ++j) {
      const double ds = cfg.alpha * soft[j] * (1.0 - soft[j]);
      out.logits[j] -= cfg.lr * (eval.grad_soft[j] + cfg.lambda_l1) * ds;
    }
  }
  out.next_loss_history.push_back(
      eval_soft_mask(model, adapter, seqs, soft_mask(out.logits, cfg.alpha),
                     false)
          .next_loss);
  out.mask = binarize_mask(out.logits, &out.forced_row);
  return out;
}

// ---------------------------------------------------------------------------
// Decoding

TokenSeq generate(const ToyLM& model, const Matrix& delta,
                  std::span<const Token> question, std::size_t max_len) {
  check_delta(model, delta);
  check_tokens(model, question);
  if (question.empty()) throw ArgumentError("generate: empty question");
  const std::size_t d = model.d();
  const Matrix w = add(model.w0(), delta);
  std::vector<double> sum(d, 0.0), h(d), hidden(d), logits(model.vocab_size());
  for (Token t : question) add_embedding(model, t, sum);
  std::size_t count = question.size();
  TokenSeq out;
  while (out.size() < max_len) {
    for (std::size_t i = 0; i < d; ++i) h[i] = sum[i] / static_cast<double>(count);
    matvec(w, h, hidden);
    kernels::omp::transposed_matvec(model.embed(), hidden, logits);
    const Token next = static_cast<Token>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (next == model.end_token()) break;
    out.push_back(next);
    add_embedding(model, next, sum);
    ++count;
  }
  return out;
}

}  // namespace mosaic
