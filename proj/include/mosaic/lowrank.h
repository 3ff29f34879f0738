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

#ifndef MOSAIC_LOWRANK_H_
#define MOSAIC_LOWRANK_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mosaic/bytes.h"
#include "mosaic/maskcodec.h"
#include "mosaic/matrix.h"

namespace mosaic {

// Low-rank update delta = b * a for one adapted d x d layer.
// a is r x d, b is d x r, 1 <= r <= d.
struct AdapterPair {
  Matrix a;
  Matrix b;

  std::size_t d() const { return b.rows(); }
  std::size_t r() const { return a.rows(); }

  // Throws ShapeError on inconsistent shapes, ArgumentError on non-finite
  // entries or r outside [1, d].
  void validate() const;

  friend bool operator==(const AdapterPair&, const AdapterPair&) = default;
};

enum class Rescale { kOff, kOn };

struct MergeEntry {
  double weight;
  DocMask mask;
  std::reference_wrapper<const AdapterPair> adapter;
};

Matrix delta_weight(const AdapterPair& adapter);

// lambda * ((mask o b) a) with lambda = d / popcount(mask) when rescaling,
// 1 otherwise.
Matrix masked_delta(const AdapterPair& adapter, const DocMask& mask,
                    Rescale rescale);

// s_i / sum(s). Scores must be finite and strictly positive.
std::vector<double> normalize_weights(std::span<const double> scores);

// sum_i w_i * masked_delta(adapter_i, mask_i, rescale), accumulated in entry
// order. Weights must sum to 1 within 1e-9.
Matrix merge(std::span<const MergeEntry> entries, Rescale rescale);

// FMAD adapter blob: magic, version u16, d u32, r u32, then b and a
// row-major as little-endian float32.
inline constexpr std::uint16_t kAdapterFormatVersion = 1;
std::vector<std::uint8_t> encode_adapter(const AdapterPair& adapter);
AdapterPair decode_adapter(std::span<const std::uint8_t> bytes);
std::size_t encoded_adapter_size(std::size_t d, std::size_t r);
void write_adapter(ByteWriter& out, const AdapterPair& adapter);
AdapterPair read_adapter(ByteReader& in);

}  // namespace mosaic

#endif  // MOSAIC_LOWRANK_H_
