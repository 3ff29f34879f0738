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


#include "mosaic/federation.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <string>
#include <utility>

#include "mosaic/bytes.h"
#include "mosaic/errors.h"
#include "mosaic/kernels.h"
#include "mosaic/rng.h"
#include "parallel.h"

namespace mosaic {
namespace {

using internal::parallel_for;

std::uint32_t to_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffu) throw ArgumentError(std::string(what) + " exceeds u32");
  return static_cast<std::uint32_t>(v);
}

// Decodes a message received by the server; any malformation aborts the
// query with a protocol error.
template <typename Fn>
auto receive(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ProtocolError&) {
    throw;
  } catch (const Error& e) {
    throw ProtocolError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Silo state.

void SiloConfig::validate() const {
  if (cap < 1) throw ArgumentError("silo: cap must be >= 1");
  if (embed_dim < 1) throw ArgumentError("silo: embed_dim must be >= 1");
  if (rewrites < 1) throw ArgumentError("silo: rewrites must be >= 1");
  if (adapter.r < 1) throw ArgumentError("silo: rank must be >= 1");
  mask.validate();
}

std::size_t SiloState::cluster_of(DocId doc_id) const {
  auto it = clusters.assignment.find(doc_id);
  if (it == clusters.assignment.end()) {
    throw ArgumentError("silo: unknown document " + std::to_string(doc_id));
  }
  return it->second;
}

const AdapterPair& SiloState::adapter_for(DocId doc_id) const {
  return adapters.at(cluster_of(doc_id));
}

void SiloState::validate() const {
  if (adapters.size() != clusters.t) {
    throw ProtocolError("silo: adapter count differs from cluster count");
  }
  if (clusters.assignment.size() != corpus.size() ||
      masks.size() != corpus.size() || index.size() != corpus.size()) {
    throw ProtocolError("silo: per-document state is incomplete");
  }
  std::vector<std::size_t> sizes(clusters.t, 0);
  for (const Document& doc : corpus) {
    auto c = clusters.assignment.find(doc.doc_id);
    if (c == clusters.assignment.end() || c->second >= clusters.t) {
      throw ProtocolError("silo: document without a cluster");
    }
    ++sizes[c->second];
    auto m = masks.find(doc.doc_id);
    if (m == masks.end() || m->second.d() != adapters[c->second].d()) {
      throw ProtocolError("silo: document without a matching mask");
    }
  }
  for (std::size_t s : sizes) {
    if (s < 1 || s > clusters.cap) throw ProtocolError("silo: bad cluster size");
  }
  for (const AdapterPair& a : adapters) a.validate();
}

SiloState silo_offline(const ToyLM& model, SiloId silo_id,
                       std::vector<Document> corpus, const SiloConfig& cfg) {
  cfg.validate();
  if (corpus.empty()) throw ArgumentError("silo_offline: empty corpus");
  SiloState silo;
  silo.silo_id = silo_id;
  silo.embed_seed = cfg.embed_seed;
  silo.corpus = std::move(corpus);
  const std::size_t n = silo.corpus.size();

  std::vector<std::vector<double>> points(n);
  std::vector<DocId> ids(n);
  std::vector<AugmentedDoc> augmented(n);
  std::map<DocId, std::size_t> position;
  for (std::size_t i = 0; i < n; ++i) {
    const Document& doc = silo.corpus[i];
    ids[i] = doc.doc_id;
    points[i] = embed(doc.tokens, cfg.embed_dim, cfg.embed_seed);
    position[doc.doc_id] = i;
  }
  silo.clusters =
      constrained_kmeans(points, ids, cfg.cap, cfg.cluster_seed, cfg.kmeans_iters);

  parallel_for(n, [&](std::size_t i) {
    const Document& doc = silo.corpus[i];
    augmented[i] = augment(doc, cfg.rewrites, cfg.qa_pairs,
                           derive_seed(cfg.augment_seed, doc.doc_id),
                           cfg.templates);
  });

  std::vector<std::vector<DocId>> members(silo.clusters.t);
  for (std::size_t c = 0; c < silo.clusters.t; ++c) {
    members[c] = cluster_members(silo.clusters, c);
  }
  silo.adapters.resize(silo.clusters.t);
  parallel_for(silo.clusters.t, [&](std::size_t c) {
    std::vector<AugmentedDoc> group;
    for (DocId id : members[c]) group.push_back(augmented[position.at(id)]);
    silo.adapters[c] = train_adapter(model, group, cfg.adapter);
  });

  std::vector<DocMask> masks(n);
  parallel_for(n, [&](std::size_t i) {
    const AdapterPair& adapter = silo.adapters[silo.clusters.assignment.at(ids[i])];
    if (!cfg.train_masks) {
      masks[i] = DocMask::full(adapter.d());
      return;
    }
    MaskTrainConfig mc = cfg.mask;
    mc.seed = derive_seed(cfg.mask.seed, ids[i]);
    masks[i] = train_mask(model, adapter, augmented[i], mc).mask;
  });

  silo.index = EmbeddingIndex(cfg.embed_dim);
  for (std::size_t i = 0; i < n; ++i) {
    silo.masks.emplace(ids[i], std::move(masks[i]));
    silo.index.add(ids[i], std::move(points[i]));
  }
  silo.validate();
  return silo;
}

std::vector<Candidate> silo_candidates(const SiloState& silo,
                                       std::span<const Token> query,
                                       std::size_t k) {
  if (silo.index.empty()) return {};
  const Embedding q = embed(query, silo.index.dim(), silo.embed_seed);
  std::vector<Candidate> out;
  for (const ScoredDoc& hit : topk(silo.index, q, k)) {
    out.push_back(Candidate{silo.silo_id, hit.doc_id, rerank_score(hit.cosine),
                            silo.masks.at(hit.doc_id)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Wire codecs.

std::vector<std::uint8_t> encode(const QueryBroadcast& msg) {
  ByteWriter w;
  w.u32(to_u32(msg.tokens.size(), "query length"));
  for (Token t : msg.tokens) w.u32(t);
  return w.take();
}

QueryBroadcast decode_query_broadcast(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  QueryBroadcast msg;
  const std::uint32_t count = r.u32();
  if (r.remaining() != 4ull * count) throw FormatError("broadcast: bad length");
  msg.tokens.resize(count);
  for (Token& t : msg.tokens) t = r.u32();
  r.expect_done();
  return msg;
}

std::size_t candidate_upload_size(std::size_t count, std::size_t d) {
  return 12 + count * (8 + packed_size(d));
}

std::vector<std::uint8_t> encode(const CandidateUpload& msg) {
  ByteWriter w;
  w.u32(msg.silo_id);
  w.u32(to_u32(msg.candidates.size(), "candidate count"));
  w.u32(to_u32(msg.d, "mask width"));
  for (const Candidate& c : msg.candidates) {
    if (c.mask.d() != msg.d) throw ShapeError("candidate upload: mask width");
    w.u32(c.doc_id);
    w.f32(static_cast<float>(c.score));
    w.raw(c.mask.packed());
  }
  return w.take();
}

CandidateUpload decode_candidate_upload(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  CandidateUpload msg;
  msg.silo_id = r.u32();
  const std::uint32_t count = r.u32();
  msg.d = r.u32();
  const std::size_t width = 8 + packed_size(msg.d);
  if (r.remaining() != count * width) {
    throw FormatError("candidate upload: bad length");
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    Candidate c;
    c.silo_id = msg.silo_id;
    c.doc_id = r.u32();
    c.score = r.f32();
    auto raw = r.raw(packed_size(msg.d));
    c.mask = DocMask(msg.d, std::vector<std::uint8_t>(raw.begin(), raw.end()));
    msg.candidates.push_back(std::move(c));
  }
  r.expect_done();
  return msg;
}

std::vector<std::uint8_t> encode(const AdapterRequest& msg) {
  ByteWriter w;
  w.u32(to_u32(msg.docs.size(), "request count"));
  for (const auto& [silo, doc] : msg.docs) {
    w.u32(silo);
    w.u32(doc);
  }
  return w.take();
}

AdapterRequest decode_adapter_request(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  AdapterRequest msg;
  const std::uint32_t count = r.u32();
  if (r.remaining() != 8ull * count) throw FormatError("request: bad length");
  for (std::uint32_t i = 0; i < count; ++i) {
    const SiloId silo = r.u32();
    const DocId doc = r.u32();
    msg.docs.emplace_back(silo, doc);
  }
  r.expect_done();
  return msg;
}

std::vector<std::uint8_t> encode(const AdapterUpload& msg) {
  ByteWriter w;
  w.u32(msg.silo_id);
  w.u32(to_u32(msg.bindings.size(), "binding count"));
  for (const auto& [doc, key] : msg.bindings) {
    w.u32(doc);
    w.u32(key);
  }
  w.u32(to_u32(msg.adapters.size(), "adapter count"));
  for (const auto& [key, adapter] : msg.adapters) {
    w.u32(key);
    write_adapter(w, adapter);
  }
  return w.take();
}

AdapterUpload decode_adapter_upload(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  AdapterUpload msg;
  msg.silo_id = r.u32();
  const std::uint32_t bindings = r.u32();
  if (r.remaining() < 8ull * bindings) throw FormatError("upload: truncated");
  for (std::uint32_t i = 0; i < bindings; ++i) {
    const DocId doc = r.u32();
    const std::uint32_t key = r.u32();
    msg.bindings.emplace_back(doc, key);
  }
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t key = r.u32();
    msg.adapters.emplace_back(key, read_adapter(r));
  }
  r.expect_done();
  return msg;
}

const char* message_kind_name(MessageKind kind) {
  switch (kind) {
    case MessageKind::kQueryBroadcast:
      return "QueryBroadcast";
    case MessageKind::kCandidateUpload:
      return "CandidateUpload";
    case MessageKind::kAdapterRequest:
      return "AdapterRequest";
    case MessageKind::kAdapterUpload:
      return "AdapterUpload";
  }
  return "unknown";
}

std::vector<WireField> wire_schema() {
  using K = FieldKind;
  const MessageKind qb = MessageKind::kQueryBroadcast;
  const MessageKind cu = MessageKind::kCandidateUpload;
  const MessageKind rq = MessageKind::kAdapterRequest;
  const MessageKind au = MessageKind::kAdapterUpload;
  return {
      {qb, "token_count", "u32", K::kCount},
      {qb, "query_tokens[]", "u32", K::kQueryToken},
      {cu, "silo_id", "u32", K::kSiloId},
      {cu, "candidate_count", "u32", K::kCount},
      {cu, "mask_width", "u32", K::kDimension},
      {cu, "candidates[].doc_id", "u32", K::kDocId},
      {cu, "candidates[].score", "f32", K::kScore},
      {cu, "candidates[].mask", "ceil(d/8) bytes", K::kMaskBits},
      {rq, "pair_count", "u32", K::kCount},
      {rq, "pairs[].silo_id", "u32", K::kSiloId},
      {rq, "pairs[].doc_id", "u32", K::kDocId},
      {au, "silo_id", "u32", K::kSiloId},
      {au, "binding_count", "u32", K::kCount},
      {au, "bindings[].doc_id", "u32", K::kDocId},
      {au, "bindings[].cluster_key", "u32", K::kClusterKey},
      {au, "adapter_count", "u32", K::kCount},
      {au, "adapters[].cluster_key", "u32", K::kClusterKey},
      {au, "adapters[].magic", "4 bytes", K::kAdapterMagic},
      {au, "adapters[].version", "u16", K::kAdapterMagic},
      {au, "adapters[].d", "u32", K::kDimension},
      {au, "adapters[].r", "u32", K::kDimension},
      {au, "adapters[].b", "d*r f32", K::kAdapterParameters},
      {au, "adapters[].a", "r*d f32", K::kAdapterParameters},
  };
}

std::span<const std::uint8_t> Channel::send(MessageKind kind,
                                            std::vector<std::uint8_t> bytes) {
  log_.push_back(SentMessage{kind, std::move(bytes)});
  return log_.back().bytes;
}

CommReport& CommReport::operator+=(const CommReport& other) {
  broadcast += other.broadcast;
  candidate_upload += other.candidate_upload;
  adapter_request += other.adapter_request;
  adapter_upload += other.adapter_upload;
  adapter_dedup_hits += other.adapter_dedup_hits;
  return *this;
}

CommReport tally(std::span<const SentMessage> transcript) {
  CommReport report;
  for (const SentMessage& m : transcript) {
    switch (m.kind) {
      case MessageKind::kQueryBroadcast:
        report.broadcast += m.bytes.size();
        break;
      case MessageKind::kCandidateUpload:
        report.candidate_upload += m.bytes.size();
        break;
      case MessageKind::kAdapterRequest:
        report.adapter_request += m.bytes.size();
        break;
      case MessageKind::kAdapterUpload:
        report.adapter_upload += m.bytes.size();
        break;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Server.

std::vector<Candidate> server_select(std::span<const Candidate> candidates,
                                     const SelectionConfig& cfg) {
  std::vector<SelectionCandidate> pool;
  pool.reserve(candidates.size());
  for (const Candidate& c : candidates) {
    pool.push_back(SelectionCandidate{c.score, c.mask});
  }
  std::vector<Candidate> out;
  for (std::size_t i : greedy_select(pool, cfg)) out.push_back(candidates[i]);
  return out;
}

void AdapterStore::absorb(AdapterUpload upload) {
  for (auto& [key, adapter] : upload.adapters) {
    adapters.insert_or_assign({upload.silo_id, key}, std::move(adapter));
  }
  for (const auto& [doc, key] : upload.bindings) {
    bindings.insert_or_assign({upload.silo_id, doc}, key);
  }
}

const AdapterPair* AdapterStore::find(SiloId silo_id, DocId doc_id) const {
  auto b = bindings.find({silo_id, doc_id});
  if (b == bindings.end()) return nullptr;
  auto a = adapters.find({silo_id, b->second});
  return a == adapters.end() ? nullptr : &a->second;
}

Matrix server_aggregate(std::span<const Candidate> selected,
                        const AdapterStore& store, Rescale rescale) {
  std::vector<double> scores;
  for (const Candidate& c : selected) scores.push_back(c.score);
  const std::vector<double> weights = normalize_weights(scores);
  std::vector<MergeEntry> entries;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const AdapterPair* adapter =
        store.find(selected[i].silo_id, selected[i].doc_id);
    if (adapter == nullptr) {
      throw ProtocolError("aggregate: no adapter for silo " +
                          std::to_string(selected[i].silo_id) + " doc " +
                          std::to_string(selected[i].doc_id));
    }
    entries.push_back(MergeEntry{weights[i], selected[i].mask, *adapter});
  }
  return merge(entries, rescale);
}

namespace {

// Silo side of an adapter request: one binding per document, one adapter per
// distinct cluster.
AdapterUpload answer_request(const SiloState& silo,
                             const AdapterRequest& request,
                             std::size_t* dedup_hits) {
  AdapterUpload upload;
  upload.silo_id = silo.silo_id;
  std::set<std::uint32_t> sent;
  for (const auto& [silo_id, doc] : request.docs) {
    if (silo_id != silo.silo_id) {
      throw ProtocolError("request addressed to another silo");
    }
    const auto key = static_cast<std::uint32_t>(silo.cluster_of(doc));
    upload.bindings.emplace_back(doc, key);
    if (sent.insert(key).second) {
      upload.adapters.emplace_back(key, silo.adapters[key]);
    } else {
      ++*dedup_hits;
    }
  }
  return upload;
}

Matrix zero_delta(const ToyLM& model) { return Matrix(model.d(), model.d()); }

}  // namespace

QueryResult run_query(const ToyLM& server_model,
                      std::span<const SiloState> silos,
                      std::span<const Token> query, const QueryConfig& cfg,
                      AdapterStore* cache) {
  if (query.empty()) throw ArgumentError("run_query: empty query");
  if (cfg.k < 1) throw ArgumentError("run_query: k must be >= 1");
  cfg.selection.validate();
  Channel channel;
  QueryResult result;

  // Broadcast: every silo decodes the same bytes.
  auto sent = channel.send(MessageKind::kQueryBroadcast,
                           encode(QueryBroadcast{TokenSeq(query.begin(), query.end())}));
  const QueryBroadcast received = decode_query_broadcast(sent);

  // Candidate generation runs concurrently across silos.
  std::vector<std::vector<std::uint8_t>> uploads(silos.size());
  parallel_for(silos.size(), [&](std::size_t m) {
    CandidateUpload up;
    up.silo_id = silos[m].silo_id;
    up.d = silos[m].d();
    up.candidates = silo_candidates(silos[m], received.tokens, cfg.k);
    uploads[m] = encode(up);
  });
  std::vector<Candidate> pool;
  std::size_t width = 0;
  for (std::size_t m = 0; m < silos.size(); ++m) {
    auto bytes = channel.send(MessageKind::kCandidateUpload, std::move(uploads[m]));
    CandidateUpload up =
        receive("candidate upload", [&] { return decode_candidate_upload(bytes); });
    if (up.silo_id != silos[m].silo_id) {
      throw ProtocolError("candidate upload from unexpected silo");
    }
    if (up.candidates.empty()) continue;
    if (width == 0) width = up.d;
    if (up.d != width) throw ProtocolError("candidate masks differ in width");
    for (Candidate& c : up.candidates) {
      if (!std::isfinite(c.score) || popcount(c.mask) == 0) {
        throw ProtocolError("candidate with invalid score or empty mask");
      }
      pool.push_back(std::move(c));
    }
  }

  if (cfg.use_selection) {
    result.selected = server_select(pool, cfg.selection);
  } else {
    // Aggregate-all ablation: every candidate that can carry weight, in
    // descending score order (pool order on ties).
    for (const Candidate& c : pool) {
      if (c.score > 0.0) result.selected.push_back(c);
    }
    std::stable_sort(result.selected.begin(), result.selected.end(),
                     [](const Candidate& x, const Candidate& y) {
                       return x.score > y.score;
                     });
    if (cfg.max_aggregate > 0 && result.selected.size() > cfg.max_aggregate) {
      result.selected.resize(cfg.max_aggregate);
    }
  }

  std::size_t dedup_hits = 0;
  AdapterStore local;
  AdapterStore& store = cache != nullptr ? *cache : local;
  for (std::size_t m = 0; m < silos.size(); ++m) {
    AdapterRequest request;
    for (const Candidate& c : result.selected) {
      if (c.silo_id != silos[m].silo_id) continue;
      if (store.find(c.silo_id, c.doc_id) != nullptr) {
        ++dedup_hits;
        continue;
      }
      auto pair = std::make_pair(c.silo_id, c.doc_id);
      if (std::find(request.docs.begin(), request.docs.end(), pair) ==
          request.docs.end()) {
        request.docs.push_back(pair);
      }
    }
    if (request.docs.empty()) continue;
    auto req_bytes = channel.send(MessageKind::kAdapterRequest, encode(request));
    const AdapterRequest at_silo = decode_adapter_request(req_bytes);
    auto up_bytes = channel.send(MessageKind::kAdapterUpload,
                                 encode(answer_request(silos[m], at_silo, &dedup_hits)));
    AdapterUpload upload =
        receive("adapter upload", [&] { return decode_adapter_upload(up_bytes); });
    if (upload.silo_id != silos[m].silo_id) {
      throw ProtocolError("adapter upload from unexpected silo");
    }
    store.absorb(std::move(upload));
  }

  const Matrix delta = result.selected.empty()
                           ? zero_delta(server_model)
                           : server_aggregate(result.selected, store, cfg.rescale);
  result.answer = generate(server_model, delta, query, cfg.max_answer_len);
  result.transcript = channel.transcript();
  result.comm = tally(result.transcript);
  result.comm.adapter_dedup_hits = dedup_hits;
  return result;
}

AdapterPair average_adapters(std::span<const AdapterPair> adapters) {
  if (adapters.empty()) throw ArgumentError("average_adapters: empty input");
  const std::size_t d = adapters.front().d();
  const std::size_t r = adapters.front().r();
  AdapterPair avg{Matrix(r, d), Matrix(d, r)};
  const double inv = 1.0 / static_cast<double>(adapters.size());
  for (const AdapterPair& ad : adapters) {
    if (ad.d() != d || ad.r() != r) {
      throw ShapeError("average_adapters: mixed shapes");
    }
    for (std::size_t i = 0; i < ad.a.values().size(); ++i) {
      avg.a.values()[i] += inv * ad.a.values()[i];
    }
    for (std::size_t i = 0; i < ad.b.values().size(); ++i) {
      avg.b.values()[i] += inv * ad.b.values()[i];
    }
  }
  return avg;
}

namespace {

constexpr std::uint32_t kAveragedKey = 0xffffffffu;

}  // namespace

QueryResult run_query_naive(const ToyLM& server_model,
                            std::span<const SiloState> silos,
                            std::span<const Token> query, std::size_t k,
                            NaiveUpload mode, std::size_t max_answer_len) {
  if (query.empty()) throw ArgumentError("run_query_naive: empty query");
  if (k < 1) throw ArgumentError("run_query_naive: k must be >= 1");
  for (const SiloState& s : silos) {
    if (s.clusters.t != s.corpus.size()) {
      throw ArgumentError("run_query_naive: silos need one adapter per document");
    }
  }
  Channel channel;
  QueryResult result;
  auto sent = channel.send(MessageKind::kQueryBroadcast,
                           encode(QueryBroadcast{TokenSeq(query.begin(), query.end())}));
  const QueryBroadcast received = decode_query_broadcast(sent);

  std::vector<std::vector<std::uint8_t>> uploads(silos.size());
  parallel_for(silos.size(), [&](std::size_t m) {
    const SiloState& silo = silos[m];
    AdapterUpload up;
    up.silo_id = silo.silo_id;
    std::vector<AdapterPair> retrieved;
    for (const Candidate& c : silo_candidates(silo, received.tokens, k)) {
      const auto key = static_cast<std::uint32_t>(silo.cluster_of(c.doc_id));
      if (mode == NaiveUpload::kPerDocument) {
        up.bindings.emplace_back(c.doc_id, key);
        up.adapters.emplace_back(key, silo.adapters[key]);
      } else {
        up.bindings.emplace_back(c.doc_id, kAveragedKey);
        retrieved.push_back(silo.adapters[key]);
      }
    }
    if (!retrieved.empty()) {
      up.adapters.emplace_back(kAveragedKey, average_adapters(retrieved));
    }
    uploads[m] = encode(up);
  });

  // Per-document uploads let the server average the weight deltas exactly;
  // a pre-averaged upload already is the silo's (factor-wise) average.
  const std::size_t d = server_model.d();
  Matrix delta(d, d);
  std::size_t contributing = 0;
  for (std::size_t m = 0; m < silos.size(); ++m) {
    auto bytes = channel.send(MessageKind::kAdapterUpload, std::move(uploads[m]));
    AdapterUpload up =
        receive("adapter upload", [&] { return decode_adapter_upload(bytes); });
    if (up.adapters.empty()) continue;
    ++contributing;
    Matrix silo_delta(d, d);
    const double inv = 1.0 / static_cast<double>(up.adapters.size());
    for (const auto& [key, adapter] : up.adapters) {
      if (adapter.d() != d) throw ProtocolError("naive upload: width mismatch");
      kernels::omp::accumulate_masked_product(silo_delta, adapter.b, adapter.a,
                                              DocMask::full(d), inv);
    }
    for (std::size_t i = 0; i < delta.values().size(); ++i) {
      delta.values()[i] += silo_delta.values()[i];
    }
  }
  if (contributing > 0) {
    const double inv = 1.0 / static_cast<double>(contributing);
    for (double& v : delta.values()) v *= inv;
  }
  result.answer = generate(server_model, delta, query, max_answer_len);
  result.transcript = channel.transcript();
  result.comm = tally(result.transcript);
  return result;
}

// ---------------------------------------------------------------------------
// Accounting and persistence.

StorageReport storage_report(std::size_t num_docs, std::size_t num_clusters,
                             std::size_t d, std::size_t r) {
  StorageReport rep;
  const std::size_t adapter = 2 * d * r * 4;
  rep.adapter_bytes = num_clusters * adapter;
  rep.mask_bytes = num_docs * packed_size(d);
  rep.total_bytes = rep.adapter_bytes + rep.mask_bytes;
  rep.baseline_per_doc_bytes = num_docs * adapter;
  return rep;
}

StorageReport storage_report(const SiloState& silo) {
  return storage_report(silo.corpus.size(), silo.clusters.t, silo.d(), silo.r());
}

namespace {

constexpr std::uint16_t kSnapshotVersion = 1;

void write_matrix_f64(ByteWriter& w, const Matrix& m) {
  w.u32(to_u32(m.rows(), "rows"));
  w.u32(to_u32(m.cols(), "cols"));
  for (double v : m.values()) w.f64(v);
}

Matrix read_matrix_f64(ByteReader& r) {
  const std::size_t rows = r.u32();
  const std::size_t cols = r.u32();
  if (r.remaining() < rows * cols * 8) throw FormatError("snapshot: truncated");
  Matrix m(rows, cols);
  for (double& v : m.values()) v = r.f64();
  return m;
}

void write_tokens(ByteWriter& w, const TokenSeq& tokens) {
  w.u32(to_u32(tokens.size(), "token count"));
  for (Token t : tokens) w.u32(t);
}

TokenSeq read_tokens(ByteReader& r) {
  const std::size_t n = r.u32();
  if (r.remaining() < 4 * n) throw FormatError("snapshot: truncated");
  TokenSeq out(n);
  for (Token& t : out) t = r.u32();
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_silo_state(const SiloState& silo) {
  ByteWriter w;
  w.magic("FMSS");
  w.u16(kSnapshotVersion);
  w.u32(silo.silo_id);
  w.u64(silo.embed_seed);
  w.u32(to_u32(silo.corpus.size(), "corpus size"));
  for (const Document& doc : silo.corpus) {
    w.u32(doc.doc_id);
    w.u32(doc.topic);
    write_tokens(w, doc.tokens);
    w.u32(to_u32(doc.triples.size(), "triple count"));
    for (const Triple& t : doc.triples) {
      w.u32(t.subject);
      w.u32(t.relation);
      write_tokens(w, t.object);
    }
  }
  w.u32(to_u32(silo.clusters.t, "clusters"));
  w.u32(to_u32(silo.clusters.cap, "cap"));
  w.u32(to_u32(silo.clusters.assignment.size(), "assignment size"));
  for (const auto& [doc, c] : silo.clusters.assignment) {
    w.u32(doc);
    w.u32(to_u32(c, "cluster"));
  }
  w.u32(to_u32(silo.adapters.size(), "adapter count"));
  for (const AdapterPair& a : silo.adapters) {
    write_matrix_f64(w, a.b);
    write_matrix_f64(w, a.a);
  }
  w.u32(to_u32(silo.masks.size(), "mask count"));
  for (const auto& [doc, mask] : silo.masks) {
    w.u32(doc);
    w.u32(to_u32(mask.d(), "mask width"));
    w.raw(mask.packed());
  }
  w.u32(to_u32(silo.index.dim(), "embedding dim"));
  w.u32(to_u32(silo.index.size(), "index size"));
  for (std::size_t i = 0; i < silo.index.size(); ++i) {
    w.u32(silo.index.ids()[i]);
    for (double v : silo.index.vector_at(i)) w.f64(v);
  }
  return w.take();
}

SiloState decode_silo_state(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("FMSS");
  if (r.u16() != kSnapshotVersion) throw FormatError("snapshot: bad version");
  SiloState silo;
  silo.silo_id = r.u32();
  silo.embed_seed = r.u64();
  const std::size_t docs = r.u32();
  for (std::size_t i = 0; i < docs; ++i) {
    Document doc;
    doc.doc_id = r.u32();
    doc.topic = r.u32();
    doc.tokens = read_tokens(r);
    const std::size_t triples = r.u32();
    for (std::size_t j = 0; j < triples; ++j) {
      Triple t;
      t.subject = r.u32();
      t.relation = r.u32();
      t.object = read_tokens(r);
      doc.triples.push_back(std::move(t));
    }
    silo.corpus.push_back(std::move(doc));
  }
  silo.clusters.t = r.u32();
  silo.clusters.cap = r.u32();
  const std::size_t assigned = r.u32();
  for (std::size_t i = 0; i < assigned; ++i) {
    const DocId doc = r.u32();
    silo.clusters.assignment[doc] = r.u32();
  }
  const std::size_t adapters = r.u32();
  for (std::size_t i = 0; i < adapters; ++i) {
    AdapterPair a;
    a.b = read_matrix_f64(r);
    a.a = read_matrix_f64(r);
    a.validate();
    silo.adapters.push_back(std::move(a));
  }
  const std::size_t masks = r.u32();
  for (std::size_t i = 0; i < masks; ++i) {
    const DocId doc = r.u32();
    const std::size_t d = r.u32();
    auto raw = r.raw(packed_size(d));
    silo.masks.emplace(doc, DocMask(d, std::vector<std::uint8_t>(raw.begin(), raw.end())));
  }
  silo.index = EmbeddingIndex(r.u32());
  const std::size_t entries = r.u32();
  for (std::size_t i = 0; i < entries; ++i) {
    const DocId doc = r.u32();
    Embedding v(silo.index.dim());
    for (double& x : v) x = r.f64();
    silo.index.add(doc, std::move(v));
  }
  r.expect_done();
  silo.validate();
  return silo;
}

}  // namespace mosaic
