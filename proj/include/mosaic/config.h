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


#ifndef MOSAIC_CONFIG_H_
#define MOSAIC_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mosaic/corpus.h"
#include "mosaic/federation.h"
#include "mosaic/toylm.h"

namespace mosaic {

// One experiment, end to end. Serialized as `key = value` lines; `#` starts a
// comment. Every key is optional and falls back to the default below.
struct ExperimentConfig {
  std::uint64_t seed = 7;

  // Corpus.
  std::size_t num_topics = 8;
  std::size_t facts_per_topic = 5;
  std::size_t docs_per_fact = 2;
  double multi_token_object_rate = 0.25;

  // Model.
  std::size_t vocab_size = 256;
  std::size_t d = 64;
  double embed_scale = 0.5;
  double base_scale = 0.5;

  // Federation layout.
  std::size_t silos = 4;
  double dirichlet_alpha = 0.1;

  // Offline stage.
  std::size_t embed_dim = 64;
  std::size_t rank = 4;
  std::size_t cap = 8;
  std::size_t kmeans_iters = 50;
  std::size_t rewrites = 2;
  std::size_t qa_pairs = 2;
  std::size_t adapter_epochs = 60;
  double adapter_lr = 0.1;
  double mask_alpha = 8.0;
  double lambda_l1 = 0.0;
  std::size_t mask_epochs = 50;
  double mask_lr = 2.0;

  // Online stage.
  std::size_t retrieval_k = 5;
  std::size_t k_prime = 3;
  double lambda_ol = 1.0;
  double tau = 0.0;
  Rescale rescale = Rescale::kOff;
  std::size_t max_answer_len = 4;
  std::size_t max_aggregate = 0;
  NaiveUpload naive_upload = NaiveUpload::kPreAveraged;

  // Ablation toggles.
  bool masks = true;
  bool selection = true;
  bool clustering = true;

  void validate() const;

  // Canonical text form: every key, fixed order, shortest round-trip reals.
  std::string serialize() const;
  // 64-bit FNV-1a of serialize().
  std::uint64_t hash() const;
  std::string hash_hex() const;
  std::vector<std::pair<std::string, std::string>> entries() const;

  CorpusOptions corpus_options() const;
  ToyLM::Options model_options() const;
  SiloConfig silo_config(const TemplateVocab& templates) const;
  QueryConfig query_config() const;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
// Sets one key from its text form; throws ArgumentError on unknown keys or
// unparsable values.
void set_config_value(ExperimentConfig& cfg, std::string_view key,
                      std::string_view value);

enum class Mode { kMosaic, kNaive, kPerDocLocal, kNoAdapter };

std::string mode_name(Mode mode);
Mode parse_mode(std::string_view name);

}  // namespace mosaic

#endif  // MOSAIC_CONFIG_H_
