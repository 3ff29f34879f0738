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


#include "mosaic/config.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "mosaic/errors.h"
#include "mosaic/rng.h"

namespace mosaic {
namespace {

// Independent RNG streams derived from the experiment seed.
enum Stream : std::uint64_t {
  kCorpusStream = 1,
  kModelStream = 2,
  kEmbedStream = 4,
  kAugmentStream = 5,
  kClusterStream = 6,
  kAdapterStream = 7,
  kMaskStream = 8,
};

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ArgumentError("config: bad value '" + std::string(value) + "' for " +
                      std::string(key));
}

std::uint64_t parse_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

double parse_real(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() ||
      !std::isfinite(out)) {
    bad_value(key, v);
  }
  return out;
}

bool parse_flag(std::string_view key, std::string_view v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  bad_value(key, v);
}

struct Field {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view)> set;
};

template <typename T>
Field size_field(const char* key, T ExperimentConfig::*member) {
  return {key,
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); },
          [key, member](ExperimentConfig& c, std::string_view v) {
            c.*member = static_cast<T>(parse_u64(key, v));
          }};
}

Field real_field(const char* key, double ExperimentConfig::*member) {
  return {key,
          [member](const ExperimentConfig& c) { return format_real(c.*member); },
          [key, member](ExperimentConfig& c, std::string_view v) {
            c.*member = parse_real(key, v);
          }};
}

Field flag_field(const char* key, bool ExperimentConfig::*member) {
  return {key,
          [member](const ExperimentConfig& c) {
            return std::string(c.*member ? "on" : "off");
          },
          [key, member](ExperimentConfig& c, std::string_view v) {
            c.*member = parse_flag(key, v);
          }};
}

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> kFields = {
      size_field("seed", &C::seed),
      size_field("num_topics", &C::num_topics),
      size_field("facts_per_topic", &C::facts_per_topic),
      size_field("docs_per_fact", &C::docs_per_fact),
      real_field("multi_token_object_rate", &C::multi_token_object_rate),
      size_field("vocab_size", &C::vocab_size),
      size_field("d", &C::d),
      real_field("embed_scale", &C::embed_scale),
      real_field("base_scale", &C::base_scale),
      size_field("silos", &C::silos),
      real_field("dirichlet_alpha", &C::dirichlet_alpha),
      size_field("embed_dim", &C::embed_dim),
      size_field("rank", &C::rank),
      size_field("cap", &C::cap),
      size_field("kmeans_iters", &C::kmeans_iters),
      size_field("rewrites", &C::rewrites),
      size_field("qa_pairs", &C::qa_pairs),
      size_field("adapter_epochs", &C::adapter_epochs),
      real_field("adapter_lr", &C::adapter_lr),
      real_field("mask_alpha", &C::mask_alpha),
      real_field("lambda_l1", &C::lambda_l1),
      size_field("mask_epochs", &C::mask_epochs),
      real_field("mask_lr", &C::mask_lr),
      size_field("retrieval_k", &C::retrieval_k),
      size_field("k_prime", &C::k_prime),
      real_field("lambda_ol", &C::lambda_ol),
      real_field("tau", &C::tau),
      {"rescale",
       [](const C& c) {
         return std::string(c.rescale == Rescale::kOn ? "on" : "off");
       },
       [](C& c, std::string_view v) {
         c.rescale = parse_flag("rescale", v) ? Rescale::kOn : Rescale::kOff;
       }},
      size_field("max_answer_len", &C::max_answer_len),
      size_field("max_aggregate", &C::max_aggregate),
      {"naive_upload",
       [](const C& c) {
         return std::string(c.naive_upload == NaiveUpload::kPreAveraged
                                ? "pre_averaged"
                                : "per_document");
       },
       [](C& c, std::string_view v) {
         if (v == "pre_averaged") {
           c.naive_upload = NaiveUpload::kPreAveraged;
         } else if (v == "per_document") {
           c.naive_upload = NaiveUpload::kPerDocument;
         } else {
           bad_value("naive_upload", v);
         }
       }},
      flag_field("masks", &C::masks),
      flag_field("selection", &C::selection),
      flag_field("clustering", &C::clustering),
  };
  return kFields;
}

void require(bool ok, const char* what) {
  if (!ok) throw ArgumentError(std::string("config: ") + what);
}

}  // namespace

void ExperimentConfig::validate() const {
  require(num_topics >= 1 && facts_per_topic >= 1 && docs_per_fact >= 1,
          "corpus sizes must be positive");
  require(multi_token_object_rate >= 0.0 && multi_token_object_rate <= 1.0,
          "multi_token_object_rate must lie in [0, 1]");
  require(vocab_size >= 2 && d >= 1, "vocab_size and d must be positive");
  require(embed_scale > 0.0 && base_scale >= 0.0, "bad model scales");
  require(silos >= 1, "silos must be >= 1");
  require(dirichlet_alpha > 0.0, "dirichlet_alpha must be > 0");
  require(embed_dim >= 1, "embed_dim must be >= 1");
  require(rank >= 1 && rank <= d, "rank must lie in [1, d]");
  require(cap >= 1, "cap must be >= 1");
  require(rewrites >= 1, "rewrites must be >= 1");
  require(adapter_lr > 0.0 && mask_lr > 0.0, "learning rates must be > 0");
  require(mask_alpha > 0.0 && lambda_l1 >= 0.0, "bad mask hyperparameters");
  require(mask_epochs >= 1, "mask_epochs must be >= 1");
  require(retrieval_k >= 1 && k_prime >= 1, "k and k' must be >= 1");
  require(lambda_ol >= 0.0, "lambda_ol must be >= 0");
  require(max_answer_len >= 1, "max_answer_len must be >= 1");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries()
    const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Field& f : fields()) out.emplace_back(f.key, f.get(*this));
  return out;
}

std::string ExperimentConfig::serialize() const {
  std::string out;
  for (const auto& [key, value] : entries()) out += key + " = " + value + "\n";
  return out;
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash()));
  return buf;
}

CorpusOptions ExperimentConfig::corpus_options() const {
  CorpusOptions o;
  o.num_topics = num_topics;
  o.facts_per_topic = facts_per_topic;
  o.docs_per_fact = docs_per_fact;
  o.vocab_size = vocab_size;
  o.multi_token_object_rate = multi_token_object_rate;
  o.seed = derive_seed(seed, kCorpusStream);
  return o;
}

ToyLM::Options ExperimentConfig::model_options() const {
  ToyLM::Options o;
  o.vocab_size = vocab_size;
  o.d = d;
  o.seed = derive_seed(seed, kModelStream);
  o.end_token = kEndToken;
  o.embed_scale = embed_scale;
  o.base_scale = base_scale;
  return o;
}

SiloConfig ExperimentConfig::silo_config(const TemplateVocab& templates) const {
  SiloConfig s;
  s.cap = clustering ? cap : 1;
  s.embed_dim = embed_dim;
  s.embed_seed = derive_seed(seed, kEmbedStream);
  s.rewrites = rewrites;
  s.qa_pairs = qa_pairs;
  s.augment_seed = derive_seed(seed, kAugmentStream);
  s.cluster_seed = derive_seed(seed, kClusterStream);
  s.kmeans_iters = kmeans_iters;
  s.adapter.r = rank;
  s.adapter.epochs = adapter_epochs;
  s.adapter.lr = adapter_lr;
  s.adapter.seed = derive_seed(seed, kAdapterStream);
  s.mask.alpha = mask_alpha;
  s.mask.lambda_l1 = lambda_l1;
  s.mask.epochs = mask_epochs;
  s.mask.lr = mask_lr;
  s.mask.seed = derive_seed(seed, kMaskStream);
  s.train_masks = masks;
  s.templates = templates;
  return s;
}

QueryConfig ExperimentConfig::query_config() const {
  QueryConfig q;
  q.k = retrieval_k;
  q.selection.k_prime = k_prime;
  q.selection.lambda_ol = lambda_ol;
  q.selection.tau = tau;
  q.use_selection = selection;
  q.rescale = rescale;
  q.max_answer_len = max_answer_len;
  q.max_aggregate = max_aggregate;
  return q;
}

void set_config_value(ExperimentConfig& cfg, std::string_view key,
                      std::string_view value) {
  for (const Field& f : fields()) {
    if (key == f.key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ArgumentError("config: unknown key '" + std::string(key) + "'");
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ArgumentError("config: line " + std::to_string(lineno) +
                          " is not key = value");
    }
    set_config_value(cfg, trim(std::string_view(body).substr(0, eq)),
                     trim(std::string_view(body).substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("config: cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::kMosaic:
      return "mosaic";
    case Mode::kNaive:
      return "naive";
    case Mode::kPerDocLocal:
      return "per_doc_local";
    case Mode::kNoAdapter:
      return "no_adapter";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::kMosaic, Mode::kNaive, Mode::kPerDocLocal,
                 Mode::kNoAdapter}) {
    if (name == mode_name(m)) return m;
  }
  throw ArgumentError("unknown mode '" + std::string(name) + "'");
}

}  // namespace mosaic
