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


#ifndef MOSAIC_HARNESS_H_
#define MOSAIC_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mosaic/config.h"
#include "mosaic/corpus.h"
#include "mosaic/federation.h"
#include "mosaic/toylm.h"

namespace mosaic {

// ---------------------------------------------------------------------------
// Building a federation from a config.

Corpus make_corpus(const ExperimentConfig& cfg);
ToyLM make_model(const ExperimentConfig& cfg);
std::vector<std::vector<Document>> partition_corpus(const ExperimentConfig& cfg,
                                                    const Corpus& corpus);
// One silo per nonempty partition; silo ids are partition indices.
std::vector<SiloState> build_silos(const ToyLM& model,
                                   const std::vector<std::vector<Document>>& parts,
                                   const SiloConfig& silo_cfg);

// ---------------------------------------------------------------------------
// Experiments.

struct EvalRecord {
  std::uint32_t query_id = 0;
  TokenSeq gold;
  TokenSeq predicted;
  int exact_match = 0;
  double token_f1 = 0.0;
  CommReport comm;
};

struct AggregateReport {
  std::size_t num_queries = 0;
  std::size_t num_silos = 0;
  double mean_exact_match = 0.0;
  double mean_token_f1 = 0.0;
  double mean_broadcast_bytes = 0.0;
  double mean_candidate_upload_bytes = 0.0;
  double mean_adapter_request_bytes = 0.0;
  double mean_adapter_upload_bytes = 0.0;
  double mean_total_bytes = 0.0;
  std::size_t adapter_dedup_hits = 0;
  StorageReport storage;  // summed over silos
};

struct ExperimentResult {
  Mode mode = Mode::kMosaic;
  std::vector<EvalRecord> records;
  AggregateReport aggregate;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, Mode mode);

void write_records_csv(std::ostream& out, const ExperimentConfig& cfg,
                       const ExperimentResult& result);
void write_summary_json(std::ostream& out, const ExperimentConfig& cfg,
                        const ExperimentResult& result);

// Intra-silo interference: the whole corpus in one silo, each query answered
// with the adapter of its own document.
struct InterferenceRow {
  std::size_t cap = 0;
  double random_unmasked_f1 = 0.0;
  double clustered_unmasked_f1 = 0.0;
  double clustered_masked_f1 = 0.0;
  double mean_mask_sparsity = 0.0;
};

struct InterferenceReport {
  double per_document_f1 = 0.0;
  double base_model_f1 = 0.0;
  std::vector<InterferenceRow> rows;
};

InterferenceReport interference_sweep(const ExperimentConfig& cfg,
                                      std::span<const std::size_t> caps);

// Inter-silo interference: F1 when the server merges the top-j candidates
// without selection, for j = 1..max_adapters, next to the selective result.
struct AggregationCurve {
  std::vector<double> aggregate_all_f1;  // index j-1
  double selective_f1 = 0.0;
};

AggregationCurve aggregation_curve(const ExperimentConfig& cfg,
                                   std::size_t max_adapters);

// Mask training statistics over every document of a single-silo fixture,
// sharing the cluster adapters across the requested sparsity weights.
struct MaskBehaviour {
  double lambda_l1 = 0.0;
  double mean_initial_loss = 0.0;
  double mean_final_loss = 0.0;
  double mean_sparsity = 0.0;  // fraction of zero bits after binarization
  std::size_t forced_rows = 0;
};

std::vector<MaskBehaviour> mask_behaviour(const ExperimentConfig& cfg,
                                          std::span<const double> lambdas);

// Storage and communication overhead.
struct StorageRow {
  std::size_t cap = 0;
  std::size_t num_docs = 0;
  std::size_t clusters = 0;  // as produced by constrained k-means
  StorageReport report;
  double adapter_ratio = 0.0;
  double mask_ratio = 0.0;
  double total_ratio = 0.0;
};

struct CommRow {
  std::size_t k = 0;
  double mosaic_candidate_bytes = 0.0;
  double mosaic_adapter_bytes = 0.0;
  double mosaic_total_bytes = 0.0;
  double naive_total_bytes = 0.0;
  double ratio = 0.0;  // mosaic / naive
};

struct OverheadReport {
  std::vector<StorageRow> storage;
  std::vector<CommRow> comm;
};

OverheadReport bench_overhead(const ExperimentConfig& cfg,
                              std::span<const std::size_t> caps,
                              std::span<const std::size_t> ks);

// Greedy selection against the exhaustive optimum on random instances.
struct SelectionCheckRow {
  std::size_t instance_id = 0;
  std::size_t n = 0;
  std::size_t k_prime = 0;
  double lambda_ol = 0.0;
  double tau = 0.0;
  double greedy_objective = 0.0;
  double optimal_objective = 0.0;
  double ratio = 0.0;  // NaN when the optimum is not positive
  bool same_set = false;
  bool threshold_ok = true;
};

std::vector<SelectionCheckRow> selection_check(std::uint64_t seed,
                                               std::span<const double> lambdas,
                                               std::size_t instances,
                                               std::size_t max_n,
                                               std::size_t max_k);

// CLIQUE reduction: max W(S) = q  <=>  a q-clique exists.
struct ReductionCheck {
  std::size_t graphs = 0;
  std::size_t checks = 0;
  std::size_t cliques_found = 0;
  std::size_t mismatches = 0;
};

// Every graph on `vertices` vertices (vertices <= 7).
ReductionCheck reduction_check_exhaustive(std::size_t vertices);
// `samples` seeded random graphs with edge probability 1/2.
ReductionCheck reduction_check_random(std::size_t vertices, std::size_t samples,
                                      std::uint64_t seed);
bool has_clique(const Graph& graph, std::size_t q);

// Analytic mask-logit gradient against central differences.
struct GradCheckRow {
  std::size_t fixture = 0;
  double max_abs_error = 0.0;
  double relative_error = 0.0;  // ||g - fd|| / max(||fd||, 1e-12)
};

std::vector<GradCheckRow> gradcheck(std::uint64_t seed, std::size_t fixtures,
                                    double step);

}  // namespace mosaic

#endif  // MOSAIC_HARNESS_H_
