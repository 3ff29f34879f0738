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


// Command-line front end: corpus generation, offline/online stages, full
// experiments, and the verification sweeps. Exit codes: 0 success, 1 an
// invariant or check failed, 2 a usage or runtime error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mosaic/config.h"
#include "mosaic/corpus.h"
#include "mosaic/errors.h"
#include "mosaic/federation.h"
#include "mosaic/harness.h"
#include "mosaic/lowrank.h"
#include "mosaic/maskcodec.h"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kError = 2;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
};

mosaic::ExperimentConfig load(const Globals& g) {
  mosaic::ExperimentConfig cfg =
      g.config_path.empty() ? mosaic::ExperimentConfig{}
                            : mosaic::load_config(g.config_path);
  for (const std::string& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw mosaic::ArgumentError("--set expects key=value, got " + kv);
    }
    mosaic::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  return cfg;
}

fs::path out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

std::ofstream open_out(const Globals& g, const std::string& name) {
  std::ofstream out(out_path(g, name), std::ios::binary);
  if (!out) throw mosaic::ArgumentError("cannot write " + name);
  return out;
}

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string words(const mosaic::TokenSeq& tokens,
                  const std::vector<std::string>& vocab) {
  std::string out;
  for (mosaic::Token t : tokens) {
    if (!out.empty()) out += ' ';
    out += t < vocab.size() ? vocab[t] : std::to_string(t);
  }
  return out;
}

int report_violation(const std::string& what) {
  std::cerr << "invariant violated: " << what << "\n";
  return kViolation;
}

// ---------------------------------------------------------------------------

int cmd_gen_corpus(const Globals& g) {
  const auto cfg = load(g);
  const mosaic::Corpus corpus = mosaic::make_corpus(cfg);
  {
    auto out = open_out(g, "corpus.jsonl");
    mosaic::write_corpus_jsonl(out, corpus.documents);
  }
  {
    auto out = open_out(g, "queries.jsonl");
    mosaic::write_queries_jsonl(out, corpus.queries);
  }
  {
    auto out = open_out(g, "vocab.json");
    mosaic::write_vocab_json(out, corpus.vocab);
  }
  {
    auto out = open_out(g, "config.txt");
    out << cfg.serialize();
  }
  // Read back: the files must reproduce the in-memory corpus exactly.
  std::ifstream docs_in(out_path(g, "corpus.jsonl"));
  std::ifstream queries_in(out_path(g, "queries.jsonl"));
  if (mosaic::read_corpus_jsonl(docs_in) != corpus.documents ||
      mosaic::read_queries_jsonl(queries_in) != corpus.queries) {
    return report_violation("corpus files do not round-trip");
  }
  std::cout << "documents " << corpus.documents.size() << ", queries "
            << corpus.queries.size() << ", vocab " << corpus.vocab.size()
            << " -> " << g.out_dir << "\n";
  return kOk;
}

std::string snapshot_name(mosaic::SiloId id) {
  return "silo_" + std::to_string(id) + ".fmss";
}

int cmd_offline(const Globals& g) {
  const auto cfg = load(g);
  const mosaic::Corpus corpus = mosaic::make_corpus(cfg);
  const mosaic::ToyLM model = mosaic::make_model(cfg);
  const auto silos = mosaic::build_silos(model, mosaic::partition_corpus(cfg, corpus),
                                         cfg.silo_config(corpus.templates));
  auto storage = open_out(g, "storage.csv");
  storage << "silo_id,documents,clusters,adapter_bytes,mask_bytes,total_bytes,"
             "per_document_baseline_bytes\n";
  nlohmann::ordered_json manifest;
  manifest["config_hash"] = cfg.hash_hex();
  manifest["silos"] = nlohmann::ordered_json::array();
  for (const mosaic::SiloState& s : silos) {
    const auto bytes = mosaic::encode_silo_state(s);
    if (mosaic::decode_silo_state(bytes) != s) {
      return report_violation("silo snapshot does not round-trip");
    }
    auto out = open_out(g, snapshot_name(s.silo_id));
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    const mosaic::StorageReport r = mosaic::storage_report(s);
    storage << s.silo_id << ',' << s.corpus.size() << ',' << s.clusters.t << ','
            << r.adapter_bytes << ',' << r.mask_bytes << ',' << r.total_bytes
            << ',' << r.baseline_per_doc_bytes << '\n';
    manifest["silos"].push_back(s.silo_id);
    std::cout << "silo " << s.silo_id << ": " << s.corpus.size() << " documents, "
              << s.clusters.t << " adapters\n";
  }
  auto out = open_out(g, "offline.json");
  out << manifest.dump(2) << '\n';
  return kOk;
}

// Loads the offline snapshots when they were produced under the same config;
// otherwise runs the offline stage in memory.
std::vector<mosaic::SiloState> silos_for(const Globals& g,
                                         const mosaic::ExperimentConfig& cfg,
                                         const mosaic::ToyLM& model,
                                         const mosaic::Corpus& corpus) {
  std::ifstream manifest_in(fs::path(g.out_dir) / "offline.json");
  if (manifest_in) {
    const auto manifest = nlohmann::json::parse(manifest_in);
    if (manifest.at("config_hash") == cfg.hash_hex()) {
      std::vector<mosaic::SiloState> silos;
      for (const auto& id : manifest.at("silos")) {
        std::ifstream in(fs::path(g.out_dir) / snapshot_name(id.get<mosaic::SiloId>()),
                         std::ios::binary);
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
        silos.push_back(mosaic::decode_silo_state(bytes));
      }
      return silos;
    }
  }
  return mosaic::build_silos(model, mosaic::partition_corpus(cfg, corpus),
                             cfg.silo_config(corpus.templates));
}

int cmd_query(const Globals& g, std::optional<std::uint32_t> query_id,
              const std::string& token_text) {
  const auto cfg = load(g);
  const mosaic::Corpus corpus = mosaic::make_corpus(cfg);
  const mosaic::ToyLM model = mosaic::make_model(cfg);
  mosaic::TokenSeq tokens;
  std::optional<mosaic::Query> gold;
  if (!token_text.empty()) {
    std::istringstream in(token_text);
    for (std::uint64_t t; in >> t;) tokens.push_back(static_cast<mosaic::Token>(t));
    if (tokens.empty()) throw mosaic::ArgumentError("--tokens: no token ids");
  } else {
    const std::uint32_t id = query_id.value_or(0);
    if (id >= corpus.queries.size()) throw mosaic::ArgumentError("--query-id out of range");
    gold = corpus.queries[id];
    tokens = gold->tokens;
  }
  const auto silos = silos_for(g, cfg, model, corpus);
  const mosaic::QueryResult r = mosaic::run_query(model, silos, tokens, cfg.query_config());
  const mosaic::QueryResult again = mosaic::run_query(model, silos, tokens, cfg.query_config());
  if (again.answer != r.answer || again.comm != r.comm) {
    return report_violation("repeated query is not deterministic");
  }
  nlohmann::ordered_json j;
  j["question"] = words(tokens, corpus.vocab);
  j["answer"] = words(r.answer, corpus.vocab);
  j["answer_tokens"] = r.answer;
  if (gold) {
    j["gold"] = words(gold->answer, corpus.vocab);
    j["token_f1"] = mosaic::token_f1(r.answer, gold->answer);
  }
  nlohmann::ordered_json sel = nlohmann::ordered_json::array();
  for (const mosaic::Candidate& c : r.selected) {
    sel.push_back({{"silo_id", c.silo_id}, {"doc_id", c.doc_id}, {"score", c.score}});
  }
  j["selected"] = sel;
  j["comm_bytes"] = {{"broadcast", r.comm.broadcast},
                     {"candidate_upload", r.comm.candidate_upload},
                     {"adapter_request", r.comm.adapter_request},
                     {"adapter_upload", r.comm.adapter_upload},
                     {"total", r.comm.total()},
                     {"adapter_dedup_hits", r.comm.adapter_dedup_hits}};
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int cmd_run(const Globals& g, const std::string& mode_text) {
  const auto cfg = load(g);
  std::vector<mosaic::Mode> modes;
  if (mode_text == "all") {
    modes = {mosaic::Mode::kMosaic, mosaic::Mode::kNaive,
             mosaic::Mode::kPerDocLocal, mosaic::Mode::kNoAdapter};
  } else {
    modes = {mosaic::parse_mode(mode_text)};
  }
  int status = kOk;
  for (mosaic::Mode mode : modes) {
    const mosaic::ExperimentResult result = mosaic::run_experiment(cfg, mode);
    const std::string name = mosaic::mode_name(mode);
    {
      auto out = open_out(g, "records_" + name + ".csv");
      mosaic::write_records_csv(out, cfg, result);
    }
    {
      auto out = open_out(g, "summary_" + name + ".json");
      mosaic::write_summary_json(out, cfg, result);
    }
    double f1 = 0.0;
    for (const mosaic::EvalRecord& r : result.records) {
      f1 += r.token_f1;
      if (r.token_f1 < 0.0 || r.token_f1 > 1.0 ||
          (r.exact_match == 1 && r.token_f1 != 1.0)) {
        status = report_violation("record metrics out of range");
      }
    }
    if (!result.records.empty() &&
        std::abs(f1 / static_cast<double>(result.records.size()) -
                 result.aggregate.mean_token_f1) > 1e-12) {
      status = report_violation("aggregate F1 differs from the record mean");
    }
    std::printf("%-14s F1 %.4f  EM %.4f  bytes/query %.1f  (config %s)\n",
                name.c_str(), result.aggregate.mean_token_f1,
                result.aggregate.mean_exact_match, result.aggregate.mean_total_bytes,
                cfg.hash_hex().c_str());
  }
  return status;
}

int cmd_bench_overhead(const Globals& g, const std::vector<std::size_t>& caps,
                       const std::vector<std::size_t>& ks) {
  const auto cfg = load(g);
  const mosaic::OverheadReport rep = mosaic::bench_overhead(cfg, caps, ks);
  int status = kOk;
  {
    auto out = open_out(g, "storage.csv");
    out << "cap,documents,clusters,adapter_bytes,mask_bytes,total_bytes,"
           "per_document_baseline_bytes,adapter_ratio,mask_ratio,total_ratio\n";
    for (const mosaic::StorageRow& r : rep.storage) {
      out << r.cap << ',' << r.num_docs << ',' << r.clusters << ','
          << r.report.adapter_bytes << ',' << r.report.mask_bytes << ','
          << r.report.total_bytes << ',' << r.report.baseline_per_doc_bytes << ','
          << real(r.adapter_ratio) << ',' << real(r.mask_ratio) << ','
          << real(r.total_ratio) << '\n';
      const std::size_t t = (r.num_docs + r.cap - 1) / r.cap;
      if (r.clusters != t ||
          r.report.adapter_bytes != t * 2 * cfg.d * cfg.rank * 4 ||
          r.report.mask_bytes != r.num_docs * mosaic::packed_size(cfg.d)) {
        status = report_violation("storage arithmetic at cap " + std::to_string(r.cap));
      }
      std::printf("cap %3zu  adapters %3zu  adapter %.4f  mask %.4f  total %.4f of per-document\n",
                  r.cap, r.clusters, r.adapter_ratio, r.mask_ratio, r.total_ratio);
    }
  }
  {
    auto out = open_out(g, "comm.csv");
    out << "k,mosaic_candidate_bytes,mosaic_adapter_bytes,mosaic_total_bytes,"
           "naive_total_bytes,ratio\n";
    const double adapter_cap =
        static_cast<double>(cfg.k_prime * (4 + 8 + mosaic::encoded_adapter_size(cfg.d, cfg.rank)) +
                            cfg.silos * 12);
    for (const mosaic::CommRow& r : rep.comm) {
      out << r.k << ',' << real(r.mosaic_candidate_bytes) << ','
          << real(r.mosaic_adapter_bytes) << ',' << real(r.mosaic_total_bytes)
          << ',' << real(r.naive_total_bytes) << ',' << real(r.ratio) << '\n';
      if (r.mosaic_adapter_bytes > adapter_cap) {
        status = report_violation("adapter upload exceeds k' adapters");
      }
      std::printf("k %3zu  mosaic %.1f B/query  naive %.1f B/query  ratio %.4f\n",
                  r.k, r.mosaic_total_bytes, r.naive_total_bytes, r.ratio);
    }
  }
  return status;
}

int cmd_selection_check(const Globals& g, std::size_t instances, std::size_t max_n,
                        std::size_t max_k, const std::vector<double>& lambdas) {
  const auto cfg = load(g);
  const auto rows = mosaic::selection_check(cfg.seed, lambdas, instances, max_n, max_k);
  auto out = open_out(g, "selection.csv");
  out << "instance_id,n,k_prime,lambda_ol,tau,greedy_objective,optimal_objective,"
         "ratio,same_set,threshold_ok\n";
  int status = kOk;
  std::map<double, std::pair<double, std::size_t>> mean_ratio;
  for (const auto& r : rows) {
    out << r.instance_id << ',' << r.n << ',' << r.k_prime << ',' << real(r.lambda_ol)
        << ',' << real(r.tau) << ',' << real(r.greedy_objective) << ','
        << real(r.optimal_objective) << ',' << real(r.ratio) << ','
        << (r.same_set ? 1 : 0) << ',' << (r.threshold_ok ? 1 : 0) << '\n';
    if (!r.threshold_ok) status = report_violation("selected score <= tau");
    if (r.lambda_ol == 0.0 && !r.same_set) {
      status = report_violation("greedy differs from optimum at lambda_ol = 0");
    }
    if (!std::isnan(r.ratio)) {
      mean_ratio[r.lambda_ol].first += r.ratio;
      ++mean_ratio[r.lambda_ol].second;
    }
  }
  for (const auto& [lambda, acc] : mean_ratio) {
    std::printf("lambda_ol %.2f  mean greedy/optimum %.6f over %zu instances\n",
                lambda, acc.first / static_cast<double>(acc.second), acc.second);
  }
  return status;
}

int cmd_reduction_check(std::size_t vertices, std::size_t samples, std::uint64_t seed) {
  const mosaic::ReductionCheck r =
      samples == 0 ? mosaic::reduction_check_exhaustive(vertices)
                   : mosaic::reduction_check_random(vertices, samples, seed);
  std::printf("graphs %zu  checks %zu  q-cliques %zu  mismatches %zu\n", r.graphs,
              r.checks, r.cliques_found, r.mismatches);
  return r.mismatches == 0 ? kOk : report_violation("reduction mismatch");
}

int cmd_gradcheck(const Globals& g, std::size_t fixtures, double step, double tol) {
  const auto cfg = load(g);
  const auto rows = mosaic::gradcheck(cfg.seed, fixtures, step);
  auto out = open_out(g, "gradcheck.csv");
  out << "fixture,max_abs_error,relative_error\n";
  double worst = 0.0;
  for (const auto& r : rows) {
    out << r.fixture << ',' << real(r.max_abs_error) << ',' << real(r.relative_error) << '\n';
    worst = std::max(worst, r.relative_error);
  }
  std::printf("fixtures %zu  worst relative error %.3e (tolerance %.1e)\n",
              rows.size(), worst, tol);
  return worst < tol ? kOk : report_violation("gradient mismatch");
}

int cmd_interference(const Globals& g, const std::vector<std::size_t>& caps,
                     std::size_t max_adapters) {
  const auto cfg = load(g);
  const mosaic::InterferenceReport ir = mosaic::interference_sweep(cfg, caps);
  {
    auto out = open_out(g, "interference.csv");
    out << "cap,per_document_f1,random_unmasked_f1,clustered_unmasked_f1,"
           "clustered_masked_f1,mean_mask_sparsity\n";
    for (const auto& r : ir.rows) {
      out << r.cap << ',' << real(ir.per_document_f1) << ','
          << real(r.random_unmasked_f1) << ',' << real(r.clustered_unmasked_f1)
          << ',' << real(r.clustered_masked_f1) << ',' << real(r.mean_mask_sparsity)
          << '\n';
      std::printf("cap %3zu  random %.3f  clustered %.3f  clustered+masked %.3f\n",
                  r.cap, r.random_unmasked_f1, r.clustered_unmasked_f1,
                  r.clustered_masked_f1);
    }
    std::printf("per-document %.3f  base model %.3f\n", ir.per_document_f1,
                ir.base_model_f1);
  }
  const mosaic::AggregationCurve curve = mosaic::aggregation_curve(cfg, max_adapters);
  auto out = open_out(g, "aggregation.csv");
  out << "adapters,aggregate_all_f1,selective_f1\n";
  for (std::size_t j = 0; j < curve.aggregate_all_f1.size(); ++j) {
    out << j + 1 << ',' << real(curve.aggregate_all_f1[j]) << ','
        << real(curve.selective_f1) << '\n';
    std::printf("adapters %3zu  aggregate-all %.3f\n", j + 1, curve.aggregate_all_f1[j]);
  }
  std::printf("selective %.3f\n", curve.selective_f1);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated parametric retrieval with clustered, masked adapters"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "key = value experiment config file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "override the config seed");
  app.add_option("--out-dir", g.out_dir, "directory for generated files")
      ->capture_default_str();
  app.add_option("--set", g.overrides, "override a config key (key=value)");

  auto* gen = app.add_subcommand("gen-corpus", "write the synthetic corpus");
  auto* offline = app.add_subcommand("offline", "run the silo offline stage");

  auto* query = app.add_subcommand("query", "answer one query");
  std::optional<std::uint32_t> query_id;
  std::string tokens;
  query->add_option("--query-id", query_id, "index into the generated queries");
  query->add_option("--tokens", tokens, "space-separated query token ids");

  auto* run = app.add_subcommand("run", "run a full experiment");
  std::string mode = "mosaic";
  run->add_option("--mode", mode, "mosaic | naive | per_doc_local | no_adapter | all")
      ->capture_default_str();

  auto* bench = app.add_subcommand("bench-overhead", "storage and communication sweep");
  std::vector<std::size_t> caps = {1, 2, 4, 5, 8, 10, 16, 20};
  std::vector<std::size_t> ks = {1, 3, 5, 10};
  bench->add_option("--caps", caps, "cluster caps")->delimiter(',')->capture_default_str();
  bench->add_option("--ks", ks, "per-silo retrieval depths")->delimiter(',')->capture_default_str();

  auto* selcheck = app.add_subcommand("selection-check", "greedy vs exhaustive selection");
  std::size_t instances = 200, max_n = 12, max_k = 4;
  std::vector<double> lambdas = {0.0, 0.5, 1.0, 2.0};
  selcheck->add_option("--instances", instances, "instances per lambda")->capture_default_str();
  selcheck->add_option("--max-n", max_n, "largest candidate count")->capture_default_str();
  selcheck->add_option("--max-k", max_k, "largest k'")->capture_default_str();
  selcheck->add_option("--lambdas", lambdas, "conflict weights")->delimiter(',');

  auto* redcheck = app.add_subcommand("reduction-check", "verify the CLIQUE reduction");
  std::size_t vertices = 6, samples = 0;
  redcheck->add_option("--vertices", vertices, "graph size")->capture_default_str();
  redcheck->add_option("--random", samples, "random graphs instead of all (0 = all)");

  auto* grad = app.add_subcommand("gradcheck", "mask gradient vs finite differences");
  std::size_t fixtures = 20;
  double step = 1e-5, tol = 1e-4;
  grad->add_option("--fixtures", fixtures, "random fixtures")->capture_default_str();
  grad->add_option("--step", step, "central difference step")->capture_default_str();
  grad->add_option("--tol", tol, "relative error tolerance")->capture_default_str();

  auto* interf = app.add_subcommand("interference", "adapter interference sweeps");
  std::vector<std::size_t> interf_caps = {5, 10, 20};
  std::size_t max_adapters = 20;
  interf->add_option("--caps", interf_caps, "documents per adapter")->delimiter(',');
  interf->add_option("--max-adapters", max_adapters, "longest aggregation")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen_corpus(g);
    if (*offline) return cmd_offline(g);
    if (*query) return cmd_query(g, query_id, tokens);
    if (*run) return cmd_run(g, mode);
    if (*bench) return cmd_bench_overhead(g, caps, ks);
    if (*selcheck) return cmd_selection_check(g, instances, max_n, max_k, lambdas);
    if (*redcheck) {
      return cmd_reduction_check(vertices, samples, load(g).seed);
    }
    if (*grad) return cmd_gradcheck(g, fixtures, step, tol);
    if (*interf) return cmd_interference(g, interf_caps, max_adapters);
  } catch (const mosaic::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
