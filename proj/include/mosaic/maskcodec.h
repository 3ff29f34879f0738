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

#ifndef MOSAIC_MASKCODEC_H_
#define MOSAIC_MASKCODEC_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mosaic {

// Binary row mask of length d, stored bit-packed: bit j of byte i is mask
// position 8*i + j (least significant bit first). Padding bits past d are
// always zero, so byte equality is mask equality.
class DocMask {
 public:
  DocMask() = default;

  // Adopts packed bytes; throws CorruptMaskError if the byte count is not
  // ceil(d/8) or a padding bit is set.
  DocMask(std::size_t d, std::vector<std::uint8_t> packed);

  static DocMask full(std::size_t d);
  static DocMask zeros(std::size_t d);

  std::size_t d() const { return d_; }
  std::span<const std::uint8_t> packed() const { return packed_; }
  bool test(std::size_t i) const {
    return (packed_[i >> 3] >> (i & 7)) & 1u;
  }

  friend bool operator==(const DocMask&, const DocMask&) = default;

 private:
  std::size_t d_ = 0;
  std::vector<std::uint8_t> packed_;
};

inline std::size_t packed_size(std::size_t d) { return (d + 7) / 8; }

// Bits must be 0 or 1 (ArgumentError otherwise).
DocMask pack(std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> unpack(const DocMask& mask);

std::size_t popcount(const DocMask& mask);
// |m1 AND m2|; ArgumentError if lengths differ.
std::size_t dot(const DocMask& m1, const DocMask& m2);

// FMMK container: magic, version u16, d u32, count u32, then count masks of
// ceil(d/8) bytes each. All masks must share d.
std::vector<std::uint8_t> encode_masks(std::span<const DocMask> masks);
std::vector<DocMask> decode_masks(std::span<const std::uint8_t> bytes);

inline constexpr std::uint16_t kMaskFormatVersion = 1;

}  // namespace mosaic

#endif  // MOSAIC_MASKCODEC_H_
