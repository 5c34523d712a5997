// Copyright 2026 The Razor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Stage 2: significant data razoring (SDR).
//
// A group of sign-magnitude integers shares one razoring point: the leading
// one of the bitwise OR of all magnitudes. Each element keeps its sign plus the
// `salient_bits` magnitude bits directly below (and including) that point; the
// number of dropped LSBs is stored once per group as the flag. Dropped bits
// round to nearest, except that an element whose retained bits are all ones is
// floored so the magnitude never carries out of its field.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "razor/tensor.hpp"

namespace razor {

struct SdrConfig {
  unsigned base_bits = 16;
  unsigned target_bits = 4;   // sign bit included
  std::size_t group_size = 16;
  unsigned flag_bits = 4;

  // ceil(log2(base_bits - target_bits + 1)).
  static unsigned DefaultFlagBits(unsigned base_bits, unsigned target_bits);
  static SdrConfig Make(unsigned base_bits, unsigned target_bits,
                        std::size_t group_size,
                        std::optional<unsigned> flag_bits = std::nullopt);

  unsigned salient_bits() const { return target_bits - 1; }
  // Largest legal flag: (base_bits - 1) - salient_bits.
  unsigned max_flag() const { return base_bits - target_bits; }

  // Throws ConfigViolation unless base in [3, 16], 2 <= target < base,
  // group_size >= 1 and max_flag() fits in flag_bits (at most 8).
  void Validate() const;

  friend bool operator==(const SdrConfig&, const SdrConfig&) = default;
};

struct CompressedGroup {
  std::uint8_t flag = 0;  // truncated LSB count
  std::vector<SignMag> elements;

  friend bool operator==(const CompressedGroup&, const CompressedGroup&) = default;
};

// Non-owning view of one compressed group inside a CompressedTensor.
struct GroupView {
  std::uint8_t flag = 0;
  std::span<const SignMag> elements;

  GroupView() = default;
  GroupView(std::uint8_t f, std::span<const SignMag> e) : flag(f), elements(e) {}
  GroupView(const CompressedGroup& g) : flag(g.flag), elements(g.elements) {}  // NOLINT
};

// Bit index (0 = LSB) of the leading one of the OR of all magnitudes; empty
// when every magnitude is zero.
std::optional<unsigned> DetectRazoringPoint(std::span<const std::uint16_t> mags);
std::optional<unsigned> DetectRazoringPoint(std::span<const SignMag> group);

CompressedGroup CompressGroup(std::span<const SignMag> group, const SdrConfig& cfg);

// Independent scalar oracle for CompressGroup: max-scan plus arithmetic
// rounding instead of OR-reduction plus bit tests. Must agree bitwise.
CompressedGroup CompressGroupReference(std::span<const SignMag> group,
                                       const SdrConfig& cfg);

std::vector<SignMag> DecompressGroup(GroupView group, const SdrConfig& cfg);

// Kernel used by the tensor paths. No validation; `out` must be as long as
// `group`. Returns the flag.
std::uint8_t CompressGroupInto(std::span<const SignMag> group,
                               unsigned salient_bits, std::span<SignMag> out);

// Row-major grouping along the last axis. The final group of each row may be
// short.
class GroupLayout {
 public:
  GroupLayout(const Shape& shape, std::size_t group_size);

  std::size_t rows() const { return rows_; }
  std::size_t row_length() const { return row_len_; }
  std::size_t groups_per_row() const { return groups_per_row_; }
  std::size_t group_count() const { return rows_ * groups_per_row_; }

  std::size_t offset(std::size_t group) const {
    return (group / groups_per_row_) * row_len_ + (group % groups_per_row_) * group_size_;
  }
  std::size_t length(std::size_t group) const {
    const std::size_t start = (group % groups_per_row_) * group_size_;
    return std::min(group_size_, row_len_ - start);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t row_len_ = 0;
  std::size_t group_size_ = 1;
  std::size_t groups_per_row_ = 0;
};

// Flat storage: element i of the tensor (row-major) sits at elements[i]; one
// flag per group in layout order.
struct CompressedTensor {
  Shape shape;
  SdrConfig config;
  std::vector<std::uint8_t> flags;
  std::vector<SignMag> elements;

  GroupLayout layout() const { return GroupLayout(shape, config.group_size); }
  GroupView group(const GroupLayout& layout, std::size_t index) const {
    return {flags[index],
            std::span(elements).subspan(layout.offset(index), layout.length(index))};
  }

  friend bool operator==(const CompressedTensor&, const CompressedTensor&) = default;
};

// Parallel over groups; output is independent of thread count.
CompressedTensor CompressTensor(const BaseTensor& base, const SdrConfig& cfg);
BaseTensor DecompressTensor(const CompressedTensor& compressed);

// Serial path built on CompressGroupReference.
CompressedTensor CompressTensorReference(const BaseTensor& base,
                                         const SdrConfig& cfg);

// Throws on any violated CompressedTensor invariant (config, flag range,
// element width, canonical zero sign, sizes).
void ValidateCompressed(const CompressedTensor& compressed);

// Stricter than ValidateCompressed: every group with a non-zero flag must hold
// an element with the top salient bit set, as CompressGroup always produces.
// Catches flags that were tampered with but are still in range.
void ValidateCanonicalFlags(const CompressedTensor& compressed);

}  // namespace razor
