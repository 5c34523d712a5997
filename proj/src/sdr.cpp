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

#include "razor/sdr.hpp"

#include <bit>
#include <string>

#include "razor/error.hpp"

namespace razor {
namespace {

void CheckGroup(std::span<const SignMag> group, const SdrConfig& cfg) {
  cfg.Validate();
  if (group.empty() || group.size() > cfg.group_size) {
    Fail(ErrorCode::kLengthMismatch, "group length " + std::to_string(group.size()) +
                                         " outside [1, " +
                                         std::to_string(cfg.group_size) + "]");
  }
  const std::uint32_t limit = MaxMagnitude(cfg.base_bits);
  for (const SignMag& e : group) {
    if (e.mag > limit) {
      Fail(ErrorCode::kInvariantViolation,
           "magnitude " + std::to_string(e.mag) + " exceeds base precision");
    }
  }
}

}  // namespace

unsigned SdrConfig::DefaultFlagBits(unsigned base_bits, unsigned target_bits) {
  if (target_bits >= base_bits) return 1;
  const unsigned states = base_bits - target_bits + 1;
  return std::bit_width(states - 1);
}

SdrConfig SdrConfig::Make(unsigned base_bits, unsigned target_bits,
                          std::size_t group_size, std::optional<unsigned> flag_bits) {
  SdrConfig cfg{base_bits, target_bits, group_size,
                flag_bits.value_or(DefaultFlagBits(base_bits, target_bits))};
  cfg.Validate();
  return cfg;
}

void SdrConfig::Validate() const {
  if (base_bits < 3 || base_bits > 16) {
    Fail(ErrorCode::kConfigViolation, "base_bits must be in [3, 16]");
  }
  if (target_bits < 2 || target_bits >= base_bits) {
    Fail(ErrorCode::kConfigViolation,
         "target_bits must satisfy 2 <= target < base (nothing left to razor)");
  }
  if (group_size == 0) Fail(ErrorCode::kConfigViolation, "group_size must be positive");
  if (flag_bits == 0 || flag_bits > 8 || (max_flag() >> flag_bits) != 0) {
    Fail(ErrorCode::kConfigViolation,
         "flag_bits=" + std::to_string(flag_bits) + " cannot hold flag values up to " +
             std::to_string(max_flag()));
  }
}

std::optional<unsigned> DetectRazoringPoint(std::span<const std::uint16_t> mags) {
  unsigned acc = 0;
  for (std::uint16_t m : mags) acc |= m;
  if (acc == 0) return std::nullopt;
  return std::bit_width(acc) - 1;
}

std::optional<unsigned> DetectRazoringPoint(std::span<const SignMag> group) {
  unsigned acc = 0;
  for (const SignMag& e : group) acc |= e.mag;
  if (acc == 0) return std::nullopt;
  return std::bit_width(acc) - 1;
}

std::uint8_t CompressGroupInto(std::span<const SignMag> group, unsigned salient_bits,
                               std::span<SignMag> out) {
  unsigned acc = 0;
  for (const SignMag& e : group) acc |= e.mag;
  const unsigned width = std::bit_width(acc);  // razoring point + 1
  const unsigned drop = width > salient_bits ? width - salient_bits : 0;
  const unsigned all_ones = (1u << salient_bits) - 1u;

  for (std::size_t i = 0; i < group.size(); ++i) {
    const unsigned mag = group[i].mag;
    unsigned q = mag >> drop;
    if (drop > 0 && q != all_ones && ((mag >> (drop - 1)) & 1u)) ++q;
    out[i] = SignMag{static_cast<std::uint8_t>(q != 0 ? group[i].sign : 0),
                     static_cast<std::uint16_t>(q)};
  }
  return static_cast<std::uint8_t>(drop);
}

CompressedGroup CompressGroup(std::span<const SignMag> group, const SdrConfig& cfg) {
  CheckGroup(group, cfg);
  CompressedGroup out;
  out.elements.resize(group.size());
  out.flag = CompressGroupInto(group, cfg.salient_bits(), out.elements);
  return out;
}

CompressedGroup CompressGroupReference(std::span<const SignMag> group,
                                       const SdrConfig& cfg) {
  CheckGroup(group, cfg);
  const unsigned salient = cfg.salient_bits();

  unsigned largest = 0;
  for (const SignMag& e : group) {
    if (e.mag > largest) largest = e.mag;
  }
  unsigned leading = 0;
  for (unsigned m = largest; m > 1; m /= 2) ++leading;

  unsigned drop = 0;
  if (largest != 0 && leading + 1 > salient) drop = leading + 1 - salient;

  unsigned divisor = 1;
  for (unsigned i = 0; i < drop; ++i) divisor *= 2;
  unsigned saturated = 1;
  for (unsigned i = 0; i < salient; ++i) saturated *= 2;
  saturated -= 1;

  CompressedGroup out;
  out.flag = static_cast<std::uint8_t>(drop);
  for (const SignMag& e : group) {
    const unsigned floor = e.mag / divisor;
    const unsigned rem = e.mag % divisor;
    unsigned kept = floor;
    if (drop > 0 && floor != saturated && 2 * rem >= divisor) kept = floor + 1;
    SignMag r;
    r.mag = static_cast<std::uint16_t>(kept);
    r.sign = kept == 0 ? 0 : e.sign;
    out.elements.push_back(r);
  }
  return out;
}

std::vector<SignMag> DecompressGroup(GroupView group, const SdrConfig& cfg) {
  cfg.Validate();
  if (group.flag > cfg.max_flag()) {
    Fail(ErrorCode::kCorruptFlag, "flag " + std::to_string(group.flag) +
                                      " exceeds maximum " + std::to_string(cfg.max_flag()));
  }
  std::vector<SignMag> out(group.elements.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const SignMag e = group.elements[i];
    if ((e.mag >> cfg.salient_bits()) != 0) {
      Fail(ErrorCode::kInvariantViolation, "compressed magnitude wider than salient bits");
    }
    out[i] = SignMag{e.mag ? e.sign : std::uint8_t{0},
                     static_cast<std::uint16_t>(e.mag << group.flag)};
  }
  return out;
}

GroupLayout::GroupLayout(const Shape& shape, std::size_t group_size)
    : group_size_(group_size) {
  if (shape.empty()) Fail(ErrorCode::kShapeMismatch, "compression needs rank >= 1");
  if (group_size == 0) Fail(ErrorCode::kConfigViolation, "group_size must be positive");
  row_len_ = shape.back();
  rows_ = NumElements(std::span(shape).first(shape.size() - 1));
  groups_per_row_ = (row_len_ + group_size - 1) / group_size;
}

CompressedTensor CompressTensor(const BaseTensor& base, const SdrConfig& cfg) {
  cfg.Validate();
  if (base.base_bits != cfg.base_bits) {
    Fail(ErrorCode::kConfigViolation, "tensor base precision differs from config");
  }
  if (NumElements(base.shape) != base.values.size()) {
    Fail(ErrorCode::kShapeMismatch, "tensor data length does not match its shape");
  }
  const GroupLayout layout(base.shape, cfg.group_size);
  CompressedTensor out{base.shape, cfg, std::vector<std::uint8_t>(layout.group_count()),
                       std::vector<SignMag>(base.values.size())};

  const std::uint32_t limit = MaxMagnitude(cfg.base_bits);
  const unsigned salient = cfg.salient_bits();
  const std::span<const SignMag> in(base.values);
  const std::span<SignMag> dst(out.elements);
  const auto groups = static_cast<std::ptrdiff_t>(layout.group_count());
  bool in_range = true;
#pragma omp parallel for schedule(static) reduction(&& : in_range)
  for (std::ptrdiff_t g = 0; g < groups; ++g) {
    const std::size_t off = layout.offset(g);
    const std::size_t len = layout.length(g);
    const auto src = in.subspan(off, len);
    unsigned acc = 0;
    for (const SignMag& e : src) acc |= e.mag;
    if (acc > limit) in_range = false;
    out.flags[g] = CompressGroupInto(src, salient, dst.subspan(off, len));
  }
  if (!in_range) Fail(ErrorCode::kInvariantViolation, "magnitude exceeds base precision");
  return out;
}

CompressedTensor CompressTensorReference(const BaseTensor& base, const SdrConfig& cfg) {
  cfg.Validate();
  if (base.base_bits != cfg.base_bits) {
    Fail(ErrorCode::kConfigViolation, "tensor base precision differs from config");
  }
  if (NumElements(base.shape) != base.values.size()) {
    Fail(ErrorCode::kShapeMismatch, "tensor data length does not match its shape");
  }
  const GroupLayout layout(base.shape, cfg.group_size);
  CompressedTensor out{base.shape, cfg, {}, {}};
  out.elements.reserve(base.values.size());
  // Rows are contiguous and groups tile them in order, so appending group by
  // group reproduces the flat element order.
  for (std::size_t g = 0; g < layout.group_count(); ++g) {
    const auto src = std::span(base.values).subspan(layout.offset(g), layout.length(g));
    CompressedGroup cg = CompressGroupReference(src, cfg);
    out.flags.push_back(cg.flag);
    out.elements.insert(out.elements.end(), cg.elements.begin(), cg.elements.end());
  }
  return out;
}

void ValidateCompressed(const CompressedTensor& ct) {
  ct.config.Validate();
  if (NumElements(ct.shape) != ct.elements.size()) {
    Fail(ErrorCode::kShapeMismatch, "element count does not match shape");
  }
  const GroupLayout layout = ct.layout();
  if (ct.flags.size() != layout.group_count()) {
    Fail(ErrorCode::kShapeMismatch, "flag count does not match group layout");
  }
  for (std::size_t g = 0; g < ct.flags.size(); ++g) {
    if (ct.flags[g] > ct.config.max_flag()) {
      Fail(ErrorCode::kCorruptFlag, "group " + std::to_string(g) + " flag " +
                                        std::to_string(ct.flags[g]) + " out of range");
    }
  }
  const unsigned salient = ct.config.salient_bits();
  for (const SignMag& e : ct.elements) {
    if ((e.mag >> salient) != 0) {
      Fail(ErrorCode::kInvariantViolation, "compressed magnitude wider than salient bits");
    }
    if (e.mag == 0 && e.sign != 0) {
      Fail(ErrorCode::kInvariantViolation, "zero magnitude with sign bit set");
    }
  }
}

void ValidateCanonicalFlags(const CompressedTensor& ct) {
  ValidateCompressed(ct);
  const GroupLayout layout = ct.layout();
  const unsigned top = 1u << (ct.config.salient_bits() - 1);
  for (std::size_t g = 0; g < layout.group_count(); ++g) {
    const GroupView view = ct.group(layout, g);
    if (view.flag == 0) continue;
    unsigned acc = 0;
    for (const SignMag& e : view.elements) acc |= e.mag;
    if (acc < top) {
      Fail(ErrorCode::kInvariantViolation,
           "group " + std::to_string(g) + " has flag " + std::to_string(view.flag) +
               " but no element reaches the top salient bit");
    }
  }
}

BaseTensor DecompressTensor(const CompressedTensor& ct) {
  ValidateCompressed(ct);
  const GroupLayout layout = ct.layout();
  BaseTensor out{ct.shape, ct.config.base_bits, std::vector<SignMag>(ct.elements.size())};
  const auto groups = static_cast<std::ptrdiff_t>(layout.group_count());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t g = 0; g < groups; ++g) {
    const std::size_t off = layout.offset(g);
    const std::size_t len = layout.length(g);
    const unsigned shift = ct.flags[g];
    for (std::size_t i = off; i < off + len; ++i) {
      const SignMag e = ct.elements[i];
      out.values[i] = SignMag{e.sign, static_cast<std::uint16_t>(e.mag << shift)};
    }
  }
  return out;
}

}  // namespace razor
