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


#include "mosaic/harness.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "json.hpp"
#include "mosaic/clustering.h"
#include "mosaic/errors.h"
#include "mosaic/lowrank.h"
#include "mosaic/retrieval.h"
#include "mosaic/rng.h"
#include "mosaic/selection.h"
#include "parallel.h"

namespace mosaic {
namespace {

using internal::parallel_for;
using nlohmann::ordered_json;

constexpr std::uint64_t kPartitionStream = 3;
constexpr std::uint64_t kGroupingStream = 9;

std::string join_tokens(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += std::to_string(tokens[i]);
  }
  return out;
}

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

EvalRecord make_record(const Query& q, TokenSeq predicted, const CommReport& comm) {
  EvalRecord rec;
  rec.query_id = q.query_id;
  rec.gold = q.answer;
  rec.predicted = std::move(predicted);
  rec.exact_match = rec.predicted == rec.gold ? 1 : 0;
  rec.token_f1 = token_f1(rec.predicted, rec.gold);
  rec.comm = comm;
  return rec;
}

AggregateReport aggregate(const std::vector<EvalRecord>& records) {
  AggregateReport a;
  a.num_queries = records.size();
  if (records.empty()) return a;
  for (const EvalRecord& r : records) {
    a.mean_exact_match += r.exact_match;
    a.mean_token_f1 += r.token_f1;
    a.mean_broadcast_bytes += static_cast<double>(r.comm.broadcast);
    a.mean_candidate_upload_bytes += static_cast<double>(r.comm.candidate_upload);
    a.mean_adapter_request_bytes += static_cast<double>(r.comm.adapter_request);
    a.mean_adapter_upload_bytes += static_cast<double>(r.comm.adapter_upload);
    a.mean_total_bytes += static_cast<double>(r.comm.total());
    a.adapter_dedup_hits += r.comm.adapter_dedup_hits;
  }
  const double n = static_cast<double>(records.size());
  a.mean_exact_match /= n;
  a.mean_token_f1 /= n;
  a.mean_broadcast_bytes /= n;
  a.mean_candidate_upload_bytes /= n;
  a.mean_adapter_request_bytes /= n;
  a.mean_adapter_upload_bytes /= n;
  a.mean_total_bytes /= n;
  return a;
}

// Storage of silos holding one unmasked adapter per document.
StorageReport per_document_storage(std::size_t docs, std::size_t d,
                                   std::size_t r) {
  StorageReport s = storage_report(docs, docs, d, r);
  s.mask_bytes = 0;
  s.total_bytes = s.adapter_bytes;
  return s;
}

StorageReport& operator+=(StorageReport& x, const StorageReport& y) {
  x.adapter_bytes += y.adapter_bytes;
  x.mask_bytes += y.mask_bytes;
  x.total_bytes += y.total_bytes;
  x.baseline_per_doc_bytes += y.baseline_per_doc_bytes;
  return x;
}

std::vector<AugmentedDoc> augment_all(const std::vector<Document>& docs,
                                      const SiloConfig& sc) {
  std::vector<AugmentedDoc> out(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) {
    out[i] = augment(docs[i], sc.rewrites, sc.qa_pairs,
                     derive_seed(sc.augment_seed, docs[i].doc_id), sc.templates);
  });
  return out;
}

// Adapters for the given groups of document positions, trained in parallel.
std::vector<AdapterPair> train_groups(const ToyLM& model,
                                      const std::vector<AugmentedDoc>& augmented,
                                      const std::vector<std::vector<std::size_t>>& groups,
                                      const AdapterTrainConfig& cfg) {
  std::vector<AdapterPair> out(groups.size());
  parallel_for(groups.size(), [&](std::size_t g) {
    std::vector<AugmentedDoc> docs;
    for (std::size_t i : groups[g]) docs.push_back(augmented[i]);
    out[g] = train_adapter(model, docs, cfg);
  });
  return out;
}

struct SingleSilo {
  std::vector<Embedding> points;
  std::vector<DocId> ids;
};

SingleSilo embed_corpus(const Corpus& corpus, const SiloConfig& sc) {
  SingleSilo s;
  for (const Document& doc : corpus.documents) {
    s.points.push_back(embed(doc.tokens, sc.embed_dim, sc.embed_seed));
    s.ids.push_back(doc.doc_id);
  }
  return s;
}

std::vector<std::vector<std::size_t>> clusters_as_groups(
    const ClusterAssignment& ca) {
  std::vector<std::vector<std::size_t>> groups(ca.t);
  for (std::size_t c = 0; c < ca.t; ++c) {
    for (DocId id : cluster_members(ca, c)) groups[c].push_back(id);
  }
  return groups;
}

}  // namespace

// ---------------------------------------------------------------------------

Corpus make_corpus(const ExperimentConfig& cfg) {
  cfg.validate();
  return gen_corpus(cfg.corpus_options());
}

ToyLM make_model(const ExperimentConfig& cfg) {
  cfg.validate();
  return ToyLM(cfg.model_options());
}

std::vector<std::vector<Document>> partition_corpus(const ExperimentConfig& cfg,
                                                    const Corpus& corpus) {
  return dirichlet_partition(corpus.documents, cfg.silos, cfg.dirichlet_alpha,
                             derive_seed(cfg.seed, kPartitionStream));
}

std::vector<SiloState> build_silos(const ToyLM& model,
                                   const std::vector<std::vector<Document>>& parts,
                                   const SiloConfig& silo_cfg) {
  std::vector<SiloState> silos;
  for (std::size_t m = 0; m < parts.size(); ++m) {
    if (parts[m].empty()) continue;
    silos.push_back(silo_offline(model, static_cast<SiloId>(m), parts[m], silo_cfg));
  }
  return silos;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, Mode mode) {
  cfg.validate();
  const Corpus corpus = make_corpus(cfg);
  const ToyLM model = make_model(cfg);
  ExperimentResult result;
  result.mode = mode;
  StorageReport storage;
  std::size_t num_silos = 0;

  switch (mode) {
    case Mode::kMosaic: {
      const auto silos = build_silos(model, partition_corpus(cfg, corpus),
                                     cfg.silo_config(corpus.templates));
      const QueryConfig qc = cfg.query_config();
      for (const Query& q : corpus.queries) {
        QueryResult r = run_query(model, silos, q.tokens, qc);
        result.records.push_back(make_record(q, std::move(r.answer), r.comm));
      }
      for (const SiloState& s : silos) storage += storage_report(s);
      num_silos = silos.size();
      break;
    }
    case Mode::kNaive: {
      SiloConfig sc = cfg.silo_config(corpus.templates);
      sc.cap = 1;
      sc.train_masks = false;
      const auto silos = build_silos(model, partition_corpus(cfg, corpus), sc);
      for (const Query& q : corpus.queries) {
        QueryResult r = run_query_naive(model, silos, q.tokens, cfg.retrieval_k,
                                        cfg.naive_upload, cfg.max_answer_len);
        result.records.push_back(make_record(q, std::move(r.answer), r.comm));
      }
      for (const SiloState& s : silos) {
        storage += per_document_storage(s.corpus.size(), s.d(), s.r());
      }
      num_silos = silos.size();
      break;
    }
    case Mode::kPerDocLocal: {
      // Non-federated reference: the whole corpus in one place, answered with
      // the adapter of the single best-matching document. Nothing is sent.
      SiloConfig sc = cfg.silo_config(corpus.templates);
      sc.cap = 1;
      sc.train_masks = false;
      const SiloState silo = silo_offline(model, 0, corpus.documents, sc);
      for (const Query& q : corpus.queries) {
        QueryResult r = run_query_naive(model, std::span(&silo, 1), q.tokens, 1,
                                        NaiveUpload::kPerDocument,
                                        cfg.max_answer_len);
        result.records.push_back(make_record(q, std::move(r.answer), CommReport{}));
      }
      storage += per_document_storage(silo.corpus.size(), silo.d(), silo.r());
      num_silos = 1;
      break;
    }
    case Mode::kNoAdapter: {
      const Matrix zero(model.d(), model.d());
      for (const Query& q : corpus.queries) {
        result.records.push_back(make_record(
            q, generate(model, zero, q.tokens, cfg.max_answer_len), CommReport{}));
      }
      break;
    }
  }
  result.aggregate = aggregate(result.records);
  result.aggregate.storage = storage;
  result.aggregate.num_silos = num_silos;
  return result;
}

void write_records_csv(std::ostream& out, const ExperimentConfig& cfg,
                       const ExperimentResult& result) {
  const std::string hash = cfg.hash_hex();
  const std::string mode = mode_name(result.mode);
  out << "config_hash,mode,query_id,gold,predicted,exact_match,token_f1,"
         "broadcast_bytes,candidate_upload_bytes,adapter_request_bytes,"
         "adapter_upload_bytes,total_bytes,adapter_dedup_hits\n";
  for (const EvalRecord& r : result.records) {
    out << hash << ',' << mode << ',' << r.query_id << ',' << join_tokens(r.gold)
        << ',' << join_tokens(r.predicted) << ',' << r.exact_match << ','
        << real(r.token_f1) << ',' << r.comm.broadcast << ','
        << r.comm.candidate_upload << ',' << r.comm.adapter_request << ','
        << r.comm.adapter_upload << ',' << r.comm.total() << ','
        << r.comm.adapter_dedup_hits << '\n';
  }
}

void write_summary_json(std::ostream& out, const ExperimentConfig& cfg,
                        const ExperimentResult& result) {
  const AggregateReport& a = result.aggregate;
  ordered_json config = ordered_json::object();
  for (const auto& [key, value] : cfg.entries()) config[key] = value;
  ordered_json j;
  j["config_hash"] = cfg.hash_hex();
  j["mode"] = mode_name(result.mode);
  j["config"] = config;
  j["num_queries"] = a.num_queries;
  j["num_silos"] = a.num_silos;
  j["mean_exact_match"] = a.mean_exact_match;
  j["mean_token_f1"] = a.mean_token_f1;
  j["mean_comm_bytes"] = {
      {"broadcast", a.mean_broadcast_bytes},
      {"candidate_upload", a.mean_candidate_upload_bytes},
      {"adapter_request", a.mean_adapter_request_bytes},
      {"adapter_upload", a.mean_adapter_upload_bytes},
      {"total", a.mean_total_bytes},
  };
  j["adapter_dedup_hits"] = a.adapter_dedup_hits;
  j["storage_bytes"] = {
      {"adapter", a.storage.adapter_bytes},
      {"mask", a.storage.mask_bytes},
      {"total", a.storage.total_bytes},
      {"per_document_baseline", a.storage.baseline_per_doc_bytes},
  };
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

InterferenceReport interference_sweep(const ExperimentConfig& cfg,
                                      std::span<const std::size_t> caps) {
  const Corpus corpus = make_corpus(cfg);
  const ToyLM model = make_model(cfg);
  const SiloConfig sc = cfg.silo_config(corpus.templates);
  const auto augmented = augment_all(corpus.documents, sc);
  const SingleSilo single = embed_corpus(corpus, sc);
  const std::size_t n = corpus.documents.size();
  const double nq = static_cast<double>(corpus.queries.size());
  auto answer_f1 = [&](const Query& q, const Matrix& delta) {
    return token_f1(generate(model, delta, q.tokens, cfg.max_answer_len), q.answer);
  };

  InterferenceReport report;
  {
    std::vector<std::vector<std::size_t>> singles(n);
    for (std::size_t i = 0; i < n; ++i) singles[i] = {i};
    const auto adapters = train_groups(model, augmented, singles, sc.adapter);
    const Matrix zero(model.d(), model.d());
    for (const Query& q : corpus.queries) {
      report.per_document_f1 += answer_f1(q, delta_weight(adapters[q.doc_id])) / nq;
      report.base_model_f1 += answer_f1(q, zero) / nq;
    }
  }

  for (std::size_t cap : caps) {
    InterferenceRow row;
    row.cap = cap;

    // Random grouping into chunks of `cap`, no masks.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(derive_seed(cfg.seed, kGroupingStream), cap));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> random_groups;
    std::vector<std::size_t> group_of(n);
    for (std::size_t g = 0; g * cap < n; ++g) {
      random_groups.emplace_back();
      for (std::size_t j = g * cap; j < std::min(n, (g + 1) * cap); ++j) {
        random_groups.back().push_back(order[j]);
        group_of[order[j]] = g;
      }
    }
    const auto random_adapters = train_groups(model, augmented, random_groups, sc.adapter);
    for (const Query& q : corpus.queries) {
      row.random_unmasked_f1 +=
          answer_f1(q, delta_weight(random_adapters[group_of[q.doc_id]])) / nq;
    }

    // Balanced clustering, with and without the document's own mask.
    const ClusterAssignment ca = constrained_kmeans(
        single.points, single.ids, cap, sc.cluster_seed, sc.kmeans_iters);
    const auto cluster_adapters =
        train_groups(model, augmented, clusters_as_groups(ca), sc.adapter);
    std::vector<double> f1_masked(corpus.queries.size());
    std::vector<double> sparsity(corpus.queries.size());
    parallel_for(corpus.queries.size(), [&](std::size_t qi) {
      const Query& q = corpus.queries[qi];
      const AdapterPair& adapter = cluster_adapters[ca.assignment.at(q.doc_id)];
      MaskTrainConfig mc = sc.mask;
      mc.seed = derive_seed(sc.mask.seed, q.doc_id);
      const DocMask mask = train_mask(model, adapter, augmented[q.doc_id], mc).mask;
      sparsity[qi] = 1.0 - static_cast<double>(popcount(mask)) /
                               static_cast<double>(mask.d());
      f1_masked[qi] = answer_f1(q, masked_delta(adapter, mask, Rescale::kOn));
    });
    for (std::size_t qi = 0; qi < corpus.queries.size(); ++qi) {
      const Query& q = corpus.queries[qi];
      row.clustered_unmasked_f1 +=
          answer_f1(q, delta_weight(cluster_adapters[ca.assignment.at(q.doc_id)])) / nq;
      row.clustered_masked_f1 += f1_masked[qi] / nq;
      row.mean_mask_sparsity += sparsity[qi] / nq;
    }
    report.rows.push_back(row);
  }
  return report;
}

AggregationCurve aggregation_curve(const ExperimentConfig& cfg,
                                   std::size_t max_adapters) {
  const Corpus corpus = make_corpus(cfg);
  const ToyLM model = make_model(cfg);
  const auto silos = build_silos(model, partition_corpus(cfg, corpus),
                                 cfg.silo_config(corpus.templates));
  const double nq = static_cast<double>(corpus.queries.size());
  AggregationCurve curve;
  curve.aggregate_all_f1.assign(max_adapters, 0.0);
  QueryConfig selective = cfg.query_config();
  selective.use_selection = true;
  for (const Query& q : corpus.queries) {
    curve.selective_f1 +=
        token_f1(run_query(model, silos, q.tokens, selective).answer, q.answer) / nq;
    for (std::size_t j = 1; j <= max_adapters; ++j) {
      QueryConfig all = selective;
      all.use_selection = false;
      all.max_aggregate = j;
      curve.aggregate_all_f1[j - 1] +=
          token_f1(run_query(model, silos, q.tokens, all).answer, q.answer) / nq;
    }
  }
  return curve;
}

std::vector<MaskBehaviour> mask_behaviour(const ExperimentConfig& cfg,
                                          std::span<const double> lambdas) {
  const Corpus corpus = make_corpus(cfg);
  const ToyLM model = make_model(cfg);
  const SiloConfig sc = cfg.silo_config(corpus.templates);
  const auto augmented = augment_all(corpus.documents, sc);
  const SingleSilo single = embed_corpus(corpus, sc);
  const ClusterAssignment ca = constrained_kmeans(
      single.points, single.ids, sc.cap, sc.cluster_seed, sc.kmeans_iters);
  const auto adapters = train_groups(model, augmented, clusters_as_groups(ca), sc.adapter);
  const std::size_t n = corpus.documents.size();

  std::vector<MaskBehaviour> out;
  for (double lambda : lambdas) {
    std::vector<MaskTrainResult> results(n);
    parallel_for(n, [&](std::size_t i) {
      MaskTrainConfig mc = sc.mask;
      mc.lambda_l1 = lambda;
      mc.seed = derive_seed(sc.mask.seed, single.ids[i]);
      results[i] = train_mask(model, adapters[ca.assignment.at(single.ids[i])],
                              augmented[i], mc);
    });
    MaskBehaviour b;
    b.lambda_l1 = lambda;
    for (const MaskTrainResult& r : results) {
      b.mean_initial_loss += r.next_loss_history.front() / static_cast<double>(n);
      b.mean_final_loss += r.next_loss_history.back() / static_cast<double>(n);
      b.mean_sparsity += (1.0 - static_cast<double>(popcount(r.mask)) /
                                    static_cast<double>(r.mask.d())) /
                         static_cast<double>(n);
      b.forced_rows += r.forced_row ? 1 : 0;
    }
    out.push_back(b);
  }
  return out;
}

OverheadReport bench_overhead(const ExperimentConfig& cfg,
                              std::span<const std::size_t> caps,
                              std::span<const std::size_t> ks) {
  const Corpus corpus = make_corpus(cfg);
  const SiloConfig sc = cfg.silo_config(corpus.templates);
  const SingleSilo single = embed_corpus(corpus, sc);
  const std::size_t n = corpus.documents.size();
  OverheadReport report;
  for (std::size_t cap : caps) {
    StorageRow row;
    row.cap = cap;
    row.num_docs = n;
    row.clusters = constrained_kmeans(single.points, single.ids, cap,
                                      sc.cluster_seed, sc.kmeans_iters)
                       .t;
    row.report = storage_report(n, row.clusters, cfg.d, cfg.rank);
    const double base = static_cast<double>(row.report.baseline_per_doc_bytes);
    row.adapter_ratio = static_cast<double>(row.report.adapter_bytes) / base;
    row.mask_ratio = static_cast<double>(row.report.mask_bytes) / base;
    row.total_ratio = static_cast<double>(row.report.total_bytes) / base;
    report.storage.push_back(row);
  }
  if (ks.empty()) return report;

  const ToyLM model = make_model(cfg);
  const auto parts = partition_corpus(cfg, corpus);
  const auto silos = build_silos(model, parts, sc);
  SiloConfig naive_cfg = sc;
  naive_cfg.cap = 1;
  naive_cfg.train_masks = false;
  const auto naive = build_silos(model, parts, naive_cfg);
  const double nq = static_cast<double>(corpus.queries.size());
  for (std::size_t k : ks) {
    CommRow row;
    row.k = k;
    QueryConfig qc = cfg.query_config();
    qc.k = k;
    for (const Query& q : corpus.queries) {
      const CommReport m = run_query(model, silos, q.tokens, qc).comm;
      row.mosaic_candidate_bytes += static_cast<double>(m.candidate_upload) / nq;
      row.mosaic_adapter_bytes += static_cast<double>(m.adapter_upload) / nq;
      row.mosaic_total_bytes += static_cast<double>(m.total()) / nq;
      row.naive_total_bytes +=
          static_cast<double>(run_query_naive(model, naive, q.tokens, k,
                                              NaiveUpload::kPerDocument,
                                              cfg.max_answer_len)
                                  .comm.total()) /
          nq;
    }
    row.ratio = row.mosaic_total_bytes / row.naive_total_bytes;
    report.comm.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------

std::vector<SelectionCheckRow> selection_check(std::uint64_t seed,
                                               std::span<const double> lambdas,
                                               std::size_t instances,
                                               std::size_t max_n,
                                               std::size_t max_k) {
  if (max_n < 2 || max_n > kMaxBruteForce || max_k < 1) {
    throw ArgumentError("selection_check: bad instance bounds");
  }
  constexpr std::size_t kWidth = 32;
  std::vector<SelectionCheckRow> rows;
  std::size_t id = 0;
  for (double lambda : lambdas) {
    std::mt19937_64 rng(derive_seed(seed, std::bit_cast<std::uint64_t>(lambda)));
    std::uniform_int_distribution<std::size_t> pick_n(2, max_n);
    std::uniform_int_distribution<std::size_t> pick_k(1, max_k);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> pick_tau(0.0, 0.3);
    std::bernoulli_distribution bit(0.3);
    std::uniform_int_distribution<std::size_t> pick_row(0, kWidth - 1);
    for (std::size_t inst = 0; inst < instances; ++inst) {
      SelectionCheckRow row;
      row.instance_id = id++;
      row.n = pick_n(rng);
      row.k_prime = pick_k(rng);
      row.lambda_ol = lambda;
      row.tau = pick_tau(rng);
      std::vector<SelectionCandidate> cands(row.n);
      for (SelectionCandidate& c : cands) {
        c.score = unit(rng);
        std::vector<std::uint8_t> bits(kWidth);
        for (auto& b : bits) b = bit(rng) ? 1 : 0;
        bits[pick_row(rng)] = 1;
        c.mask = pack(bits);
      }
      SelectionConfig sc{row.k_prime, row.lambda_ol, row.tau};
      auto greedy = greedy_select(cands, sc);
      auto best = brute_force_select(cands, sc);
      row.greedy_objective = greedy.empty() ? 0.0 : objective(greedy, cands, sc);
      row.optimal_objective = best.empty() ? 0.0 : objective(best, cands, sc);
      row.ratio = row.optimal_objective > 0.0
                      ? row.greedy_objective / row.optimal_objective
                      : std::numeric_limits<double>::quiet_NaN();
      for (std::size_t i : greedy) {
        if (!(cands[i].score > row.tau)) row.threshold_ok = false;
      }
      std::sort(greedy.begin(), greedy.end());
      std::sort(best.begin(), best.end());
      row.same_set = greedy == best;
      rows.push_back(row);
    }
  }
  return rows;
}

bool has_clique(const Graph& graph, std::size_t q) {
  if (q == 0) return true;
  if (graph.n > 63) throw CapacityError("has_clique: too many vertices");
  const std::uint64_t limit = std::uint64_t{1} << graph.n;
  for (std::uint64_t set = 0; set < limit; ++set) {
    if (static_cast<std::size_t>(std::popcount(set)) != q) continue;
    bool clique = true;
    for (std::size_t u = 0; u < graph.n && clique; ++u) {
      if (!((set >> u) & 1)) continue;
      for (std::size_t v = u + 1; v < graph.n; ++v) {
        if (((set >> v) & 1) && !graph.edge(u, v)) {
          clique = false;
          break;
        }
      }
    }
    if (clique) return true;
  }
  return false;
}

namespace {

void check_graph(const Graph& g, ReductionCheck& out) {
  ++out.graphs;
  for (std::size_t q = 2; q <= g.n; ++q) {
    const double big_b = static_cast<double>(q) + 1.0;
    const WssOptimum best = wss_maximize(clique_to_wss(g, q, big_b));
    const bool reaches_q = std::abs(best.value - static_cast<double>(q)) < 1e-9;
    const bool clique = has_clique(g, q);
    ++out.checks;
    out.cliques_found += clique ? 1 : 0;
    if (reaches_q != clique) ++out.mismatches;
  }
}

}  // namespace

ReductionCheck reduction_check_exhaustive(std::size_t vertices) {
  if (vertices < 2 || vertices > 7) {
    throw ArgumentError("reduction_check: exhaustive mode needs 2..7 vertices");
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t u = 0; u < vertices; ++u) {
    for (std::size_t v = u + 1; v < vertices; ++v) pairs.emplace_back(u, v);
  }
  ReductionCheck out;
  for (std::uint64_t edges = 0; edges < (std::uint64_t{1} << pairs.size()); ++edges) {
    Graph g(vertices);
    for (std::size_t e = 0; e < pairs.size(); ++e) {
      if ((edges >> e) & 1) g.connect(pairs[e].first, pairs[e].second);
    }
    check_graph(g, out);
  }
  return out;
}

ReductionCheck reduction_check_random(std::size_t vertices, std::size_t samples,
                                      std::uint64_t seed) {
  if (vertices < 2 || vertices > 20) {
    throw ArgumentError("reduction_check: random mode needs 2..20 vertices");
  }
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  ReductionCheck out;
  for (std::size_t s = 0; s < samples; ++s) {
    Graph g(vertices);
    for (std::size_t u = 0; u < vertices; ++u) {
      for (std::size_t v = u + 1; v < vertices; ++v) {
        if (coin(rng)) g.connect(u, v);
      }
    }
    check_graph(g, out);
  }
  return out;
}

std::vector<GradCheckRow> gradcheck(std::uint64_t seed, std::size_t fixtures,
                                    double step) {
  if (!(step > 0.0)) throw ArgumentError("gradcheck: step must be > 0");
  std::vector<GradCheckRow> rows;
  for (std::size_t f = 0; f < fixtures; ++f) {
    std::mt19937_64 rng(derive_seed(seed, f));
    const std::size_t vocab = 8 + f % 5;
    const std::size_t d = 4 + f % 6;
    const std::size_t r = 1 + f % 3;
    std::normal_distribution<double> normal(0.0, 1.0);
    auto random_matrix = [&](std::size_t rows_, std::size_t cols, double scale) {
      Matrix m(rows_, cols);
      for (double& v : m.values()) v = scale * normal(rng);
      return m;
    };
    const ToyLM model(random_matrix(d, vocab, 0.7), random_matrix(d, d, 0.4), 1);
    const AdapterPair adapter{random_matrix(r, d, 0.5), random_matrix(d, r, 0.5)};
    std::uniform_int_distribution<Token> tok(0, static_cast<Token>(vocab - 1));
    auto seq = [&](std::size_t len) {
      TokenSeq s(len);
      for (Token& t : s) t = tok(rng);
      return s;
    };
    AugmentedDoc doc;
    doc.rewrites = {seq(5), seq(4)};
    doc.qa_pairs = {QaPair{seq(3), seq(1)}};
    std::vector<double> logits(d);
    for (double& v : logits) v = normal(rng);
    MaskTrainConfig mc;
    mc.alpha = std::uniform_real_distribution<double>(0.5, 4.0)(rng);
    mc.lambda_l1 = std::uniform_real_distribution<double>(0.0, 0.1)(rng);

    const auto g = grad_mask_logits(model, adapter, doc, logits, mc);
    double diff2 = 0.0, fd2 = 0.0, max_abs = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<double> plus = logits, minus = logits;
      plus[j] += step;
      minus[j] -= step;
      const double fd = (mask_objective(model, adapter, doc, plus, mc) -
                         mask_objective(model, adapter, doc, minus, mc)) /
                        (2.0 * step);
      diff2 += (g[j] - fd) * (g[j] - fd);
      fd2 += fd * fd;
      max_abs = std::max(max_abs, std::abs(g[j] - fd));
    }
    rows.push_back(GradCheckRow{f, max_abs,
                                std::sqrt(diff2) / std::max(std::sqrt(fd2), 1e-12)});
  }
  return rows;
}

}  // namespace mosaic
