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

#include "mosaic/lowrank.h"

#include <cmath>
#include <string>

#include "mosaic/errors.h"
#include "mosaic/kernels.h"

namespace mosaic {

void AdapterPair::validate() const {
  const std::size_t r = a.rows();
  const std::size_t d = a.cols();
  if (b.rows() != d || b.cols() != r) {
    throw ShapeError("adapter: a is " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " but b is " +
                     std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  if (r < 1 || r > d) throw ArgumentError("adapter: rank must lie in [1, d]");
  if (!a.all_finite() || !b.all_finite()) {
    throw ArgumentError("adapter: non-finite entry");
  }
}

Matrix delta_weight(const AdapterPair& adapter) {
  adapter.validate();
  return kernels::omp::low_rank_product(adapter.b, adapter.a);
}

namespace {

double rescale_factor(const AdapterPair& adapter, const DocMask& mask,
                      Rescale rescale) {
  if (mask.d() != adapter.d()) {
    throw ShapeError("mask length " + std::to_string(mask.d()) +
                     " differs from adapter width " +
                     std::to_string(adapter.d()));
  }
  const std::size_t active = popcount(mask);
  if (active == 0) throw UndefinedRescaleError("masked update with empty mask");
  if (rescale == Rescale::kOff) return 1.0;
  return static_cast<double>(adapter.d()) / static_cast<double>(active);
}

}  // namespace

Matrix masked_delta(const AdapterPair& adapter, const DocMask& mask,
                    Rescale rescale) {
  adapter.validate();
  const double lambda = rescale_factor(adapter, mask, rescale);
  Matrix out(adapter.d(), adapter.d());
  kernels::omp::accumulate_masked_product(out, adapter.b, adapter.a, mask,
                                          lambda);
  return out;
}

std::vector<double> normalize_weights(std::span<const double> scores) {
  if (scores.empty()) throw ArgumentError("normalize_weights: empty list");
  double total = 0.0;
  for (double s : scores) {
    if (!std::isfinite(s) || s <= 0.0) {
      throw ArgumentError("normalize_weights: scores must be finite and > 0");
    }
    total += s;
  }
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] / total;
  return out;
}

Matrix merge(std::span<const MergeEntry> entries, Rescale rescale) {
  if (entries.empty()) throw ArgumentError("merge: no entries");
  const std::size_t d = entries.front().adapter.get().d();
  double weight_sum = 0.0;
  for (const MergeEntry& e : entries) {
    const AdapterPair& adapter = e.adapter.get();
    adapter.validate();
    if (adapter.d() != d) throw ShapeError("merge: adapters differ in d");
    if (!std::isfinite(e.weight) || e.weight < 0.0 || e.weight > 1.0) {
      throw ArgumentError("merge: weight outside [0, 1]");
    }
    weight_sum += e.weight;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw ArgumentError("merge: weights must sum to 1");
  }
  Matrix out(d, d);
  for (const MergeEntry& e : entries) {
    const AdapterPair& adapter = e.adapter.get();
    const double lambda = rescale_factor(adapter, e.mask, rescale);
    kernels::omp::accumulate_masked_product(out, adapter.b, adapter.a, e.mask,
                                            e.weight * lambda);
  }
  return out;
}

std::size_t encoded_adapter_size(std::size_t d, std::size_t r) {
  return 4 + 2 + 4 + 4 + 2 * d * r * sizeof(float);
}

void write_adapter(ByteWriter& out, const AdapterPair& adapter) {
  adapter.validate();
  out.magic("FMAD");
  out.u16(kAdapterFormatVersion);
  out.u32(static_cast<std::uint32_t>(adapter.d()));
  out.u32(static_cast<std::uint32_t>(adapter.r()));
  for (double v : adapter.b.values()) out.f32(static_cast<float>(v));
  for (double v : adapter.a.values()) out.f32(static_cast<float>(v));
}

AdapterPair read_adapter(ByteReader& in) {
  in.expect_magic("FMAD");
  if (in.u16() != kAdapterFormatVersion) {
    throw FormatError("unsupported FMAD version");
  }
  const std::size_t d = in.u32();
  const std::size_t r = in.u32();
  if (r < 1 || r > d) throw FormatError("FMAD: rank outside [1, d]");
  if (in.remaining() < 2 * d * r * sizeof(float)) {
    throw FormatError("truncated input");
  }
  AdapterPair adapter{Matrix(r, d), Matrix(d, r)};
  for (double& v : adapter.b.values()) v = in.f32();
  for (double& v : adapter.a.values()) v = in.f32();
  adapter.validate();
  return adapter;
}

std::vector<std::uint8_t> encode_adapter(const AdapterPair& adapter) {
  ByteWriter w;
  write_adapter(w, adapter);
  return w.take();
}

AdapterPair decode_adapter(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  AdapterPair adapter = read_adapter(r);
  r.expect_done();
  return adapter;
}

}  // namespace mosaic
