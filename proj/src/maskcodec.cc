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

#include "mosaic/maskcodec.h"

#include <bit>
#include <string>

#include "mosaic/bytes.h"
#include "mosaic/errors.h"

namespace mosaic {

DocMask::DocMask(std::size_t d, std::vector<std::uint8_t> packed)
    : d_(d), packed_(std::move(packed)) {
  if (packed_.size() != packed_size(d_)) {
    throw CorruptMaskError("mask of length " + std::to_string(d_) + " needs " +
                           std::to_string(packed_size(d_)) + " bytes, got " +
                           std::to_string(packed_.size()));
  }
  if (d_ % 8 != 0) {
    const std::uint8_t used = static_cast<std::uint8_t>((1u << (d_ % 8)) - 1);
    if (packed_.back() & ~used) {
      throw CorruptMaskError("nonzero padding bits in packed mask");
    }
  }
}

DocMask DocMask::full(std::size_t d) {
  std::vector<std::uint8_t> bytes(packed_size(d), 0xFF);
  if (d % 8 != 0) bytes.back() = static_cast<std::uint8_t>((1u << (d % 8)) - 1);
  return DocMask(d, std::move(bytes));
}

DocMask DocMask::zeros(std::size_t d) {
  return DocMask(d, std::vector<std::uint8_t>(packed_size(d), 0));
}

DocMask pack(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> bytes(packed_size(bits.size()), 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) throw ArgumentError("pack: mask entries must be 0 or 1");
    bytes[i >> 3] |= static_cast<std::uint8_t>(bits[i] << (i & 7));
  }
  return DocMask(bits.size(), std::move(bytes));
}

std::vector<std::uint8_t> unpack(const DocMask& mask) {
  std::vector<std::uint8_t> bits(mask.d());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = mask.test(i);
  return bits;
}

std::size_t popcount(const DocMask& mask) {
  std::size_t n = 0;
  for (std::uint8_t b : mask.packed()) n += std::popcount(b);
  return n;
}

std::size_t dot(const DocMask& m1, const DocMask& m2) {
  if (m1.d() != m2.d()) throw ArgumentError("dot: mask lengths differ");
  auto a = m1.packed();
  auto b = m2.packed();
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    n += std::popcount(static_cast<std::uint8_t>(a[i] & b[i]));
  }
  return n;
}

std::vector<std::uint8_t> encode_masks(std::span<const DocMask> masks) {
  const std::size_t d = masks.empty() ? 0 : masks.front().d();
  ByteWriter w;
  w.magic("FMMK");
  w.u16(kMaskFormatVersion);
  w.u32(static_cast<std::uint32_t>(d));
  w.u32(static_cast<std::uint32_t>(masks.size()));
  for (const DocMask& m : masks) {
    if (m.d() != d) throw ArgumentError("encode_masks: mixed mask lengths");
    w.raw(m.packed());
  }
  return w.take();
}

std::vector<DocMask> decode_masks(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("FMMK");
  if (r.u16() != kMaskFormatVersion) throw FormatError("unsupported FMMK version");
  const std::size_t d = r.u32();
  const std::size_t count = r.u32();
  std::vector<DocMask> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto raw = r.raw(packed_size(d));
    out.emplace_back(d, std::vector<std::uint8_t>(raw.begin(), raw.end()));
  }
  r.expect_done();
  return out;
}

}  // namespace mosaic
