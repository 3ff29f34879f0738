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


#ifndef MOSAIC_FEDERATION_H_
#define MOSAIC_FEDERATION_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mosaic/clustering.h"
#include "mosaic/document.h"
#include "mosaic/lowrank.h"
#include "mosaic/maskcodec.h"
#include "mosaic/retrieval.h"
#include "mosaic/selection.h"
#include "mosaic/toylm.h"

namespace mosaic {

using SiloId = std::uint32_t;

// Everything a silo needs to turn its corpus into parametric knowledge.
struct SiloConfig {
  std::size_t cap = 8;  // maximum documents per cluster adapter
  std::size_t embed_dim = 64;
  std::uint64_t embed_seed = 1;
  std::size_t rewrites = 2;
  std::size_t qa_pairs = 2;
  std::uint64_t augment_seed = 5;
  std::uint64_t cluster_seed = 1;
  std::size_t kmeans_iters = 50;
  AdapterTrainConfig adapter;
  MaskTrainConfig mask;
  bool train_masks = true;  // false: every document gets the full mask
  TemplateVocab templates;

  void validate() const;
};

struct SiloState {
  SiloId silo_id = 0;
  std::vector<Document> corpus;
  ClusterAssignment clusters;
  std::vector<AdapterPair> adapters;  // index = cluster index
  std::map<DocId, DocMask> masks;
  EmbeddingIndex index;
  std::uint64_t embed_seed = 0;

  std::size_t d() const { return adapters.empty() ? 0 : adapters.front().d(); }
  std::size_t r() const { return adapters.empty() ? 0 : adapters.front().r(); }
  std::size_t cluster_of(DocId doc_id) const;
  const AdapterPair& adapter_for(DocId doc_id) const;
  // Throws ProtocolError when the state breaks a structural invariant.
  void validate() const;

  friend bool operator==(const SiloState&, const SiloState&) = default;
};

// Offline stage: embed, cluster, augment, train cluster adapters, train one
// mask per document, build the retrieval index.
SiloState silo_offline(const ToyLM& model, SiloId silo_id,
                       std::vector<Document> corpus, const SiloConfig& cfg);

struct Candidate {
  SiloId silo_id = 0;
  DocId doc_id = 0;
  double score = 0.0;
  DocMask mask;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

std::vector<Candidate> silo_candidates(const SiloState& silo,
                                       std::span<const Token> query,
                                       std::size_t k);

// ---------------------------------------------------------------------------
// Wire messages. Every message travels as bytes through a Channel; the
// receiving side only ever sees the decoded bytes.

struct QueryBroadcast {
  TokenSeq tokens;
  friend bool operator==(const QueryBroadcast&, const QueryBroadcast&) = default;
};

struct CandidateUpload {
  SiloId silo_id = 0;
  std::size_t d = 0;
  std::vector<Candidate> candidates;
  friend bool operator==(const CandidateUpload&,
                         const CandidateUpload&) = default;
};

struct AdapterRequest {
  std::vector<std::pair<SiloId, DocId>> docs;
  friend bool operator==(const AdapterRequest&, const AdapterRequest&) = default;
};

struct AdapterUpload {
  SiloId silo_id = 0;
  // Which uploaded cluster adapter serves each requested document.
  std::vector<std::pair<DocId, std::uint32_t>> bindings;
  std::vector<std::pair<std::uint32_t, AdapterPair>> adapters;
  friend bool operator==(const AdapterUpload&, const AdapterUpload&) = default;
};

std::vector<std::uint8_t> encode(const QueryBroadcast& msg);
std::vector<std::uint8_t> encode(const CandidateUpload& msg);
std::vector<std::uint8_t> encode(const AdapterRequest& msg);
std::vector<std::uint8_t> encode(const AdapterUpload& msg);
QueryBroadcast decode_query_broadcast(std::span<const std::uint8_t> bytes);
CandidateUpload decode_candidate_upload(std::span<const std::uint8_t> bytes);
AdapterRequest decode_adapter_request(std::span<const std::uint8_t> bytes);
AdapterUpload decode_adapter_upload(std::span<const std::uint8_t> bytes);

// Byte size of a CandidateUpload carrying `count` candidates of width d.
std::size_t candidate_upload_size(std::size_t count, std::size_t d);

enum class MessageKind {
  kQueryBroadcast,
  kCandidateUpload,
  kAdapterRequest,
  kAdapterUpload,
};

const char* message_kind_name(MessageKind kind);

// What a wire field may carry. Locality audits assert that no field of any
// message has a document-content kind.
enum class FieldKind {
  kCount,
  kDimension,
  kSiloId,
  kDocId,
  kClusterKey,
  kQueryToken,
  kScore,
  kMaskBits,
  kAdapterMagic,
  kAdapterParameters,
};

struct WireField {
  MessageKind message;
  std::string name;
  std::string encoding;
  FieldKind kind;
};

// Exhaustive field listing of every wire message.
std::vector<WireField> wire_schema();

struct SentMessage {
  MessageKind kind;
  std::vector<std::uint8_t> bytes;
};

// In-process transport that records every transmitted byte.
class Channel {
 public:
  std::span<const std::uint8_t> send(MessageKind kind,
                                     std::vector<std::uint8_t> bytes);
  const std::vector<SentMessage>& transcript() const { return log_; }

 private:
  std::vector<SentMessage> log_;
};

struct CommReport {
  std::size_t broadcast = 0;
  std::size_t candidate_upload = 0;
  std::size_t adapter_request = 0;
  std::size_t adapter_upload = 0;
  std::size_t adapter_dedup_hits = 0;

  std::size_t total() const {
    return broadcast + candidate_upload + adapter_request + adapter_upload;
  }
  CommReport& operator+=(const CommReport& other);
  friend bool operator==(const CommReport&, const CommReport&) = default;
};

CommReport tally(std::span<const SentMessage> transcript);

// ---------------------------------------------------------------------------
// Server side.

std::vector<Candidate> server_select(std::span<const Candidate> candidates,
                                     const SelectionConfig& cfg);

// Adapters received by the server, keyed by (silo, cluster key), plus the
// document-to-cluster bindings that accompanied them.
struct AdapterStore {
  std::map<std::pair<SiloId, std::uint32_t>, AdapterPair> adapters;
  std::map<std::pair<SiloId, DocId>, std::uint32_t> bindings;

  void absorb(AdapterUpload upload);
  const AdapterPair* find(SiloId silo_id, DocId doc_id) const;
};

Matrix server_aggregate(std::span<const Candidate> selected,
                        const AdapterStore& store, Rescale rescale);

struct QueryConfig {
  std::size_t k = 5;  // candidates retrieved per silo
  SelectionConfig selection;
  bool use_selection = true;  // false: aggregate every candidate
  // With selection off, keep only the highest-scoring candidates (0 = all).
  std::size_t max_aggregate = 0;
  Rescale rescale = Rescale::kOff;
  std::size_t max_answer_len = 4;
};

struct QueryResult {
  TokenSeq answer;
  CommReport comm;
  std::vector<Candidate> selected;
  std::vector<SentMessage> transcript;
};

// Online stage. When `cache` is non-null, adapters already held in it are not
// requested again and newly received adapters are kept for later queries.
QueryResult run_query(const ToyLM& server_model,
                      std::span<const SiloState> silos,
                      std::span<const Token> query, const QueryConfig& cfg,
                      AdapterStore* cache = nullptr);

enum class NaiveUpload {
  kPreAveraged,  // each silo averages its k adapters before uploading one
  kPerDocument,  // each silo uploads its k adapters; the server averages
};

// Factor-wise parameter average of equally shaped adapters.
AdapterPair average_adapters(std::span<const AdapterPair> adapters);

// Baseline with one adapter per document and no masks: every silo returns
// the adapters of its top-k documents, averaged per silo; the server sums the
// silo averages and scales by the number of contributing silos.
QueryResult run_query_naive(const ToyLM& server_model,
                            std::span<const SiloState> silos,
                            std::span<const Token> query, std::size_t k,
                            NaiveUpload mode = NaiveUpload::kPreAveraged,
                            std::size_t max_answer_len = 4);

// ---------------------------------------------------------------------------
// Accounting and persistence.

struct StorageReport {
  std::size_t adapter_bytes = 0;
  std::size_t mask_bytes = 0;
  std::size_t total_bytes = 0;
  std::size_t baseline_per_doc_bytes = 0;

  friend bool operator==(const StorageReport&, const StorageReport&) = default;
};

StorageReport storage_report(std::size_t num_docs, std::size_t num_clusters,
                             std::size_t d, std::size_t r);
StorageReport storage_report(const SiloState& silo);

// Full-precision snapshot of a silo for offline-stage caching. Stays on the
// silo's own disk; never sent over a Channel.
std::vector<std::uint8_t> encode_silo_state(const SiloState& silo);
SiloState decode_silo_state(std::span<const std::uint8_t> bytes);

}  // namespace mosaic

#endif  // MOSAIC_FEDERATION_H_
