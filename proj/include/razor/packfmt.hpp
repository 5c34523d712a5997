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

// On-disk formats. All multi-byte integers are little-endian; bit-packed
// sections are MSB-first and zero-padded to a byte boundary.
//
// FTN1  raw float tensor
//   "FTN1" | version u16 | dtype u8 (0 = f32) | ndim u8 | dims u64 x ndim |
//   f32 payload
//
// QRZ1  SDR-compressed tensor
//   "QRZ1" | version u16 | role u8 | base_bits u8 | target_bits u8 |
//   flag_bits u8 | group_size u32 | granularity u8 | channel_axis u8 |
//   ndim u8 | dims u64 x ndim | n_scales u32 | scales f32 x n_scales |
//   flags (flag_bits each) | elements (sign bit, then magnitude bits)
//
// QBT1  base-precision integer tensor (output of quantize)
//   "QBT1" | version u16 | role u8 | base_bits u8 | granularity u8 |
//   channel_axis u8 | ndim u8 | dims u64 x ndim | n_scales u32 |
//   scales f32 x n_scales | elements (sign bit, then base_bits-1 magnitude
//   bits)
//
// QRZM  calibrated scale set (output of calibrate)
//   "QRZM" | version u16 | role u8 | base_bits u8 | granularity u8 |
//   channel_axis u8 | n_scales u32 | scales f32 x n_scales
//
// Decoders are strict: trailing bytes, non-zero padding, a set sign bit on a
// zero magnitude, or a non-positive scale are rejected, so every accepted
// stream re-encodes to identical bytes.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "razor/sdr.hpp"
#include "razor/tensor.hpp"

namespace razor {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint16_t kFormatVersion = 1;

struct QrzContents {
  CompressedTensor tensor;
  ScaleSet scales;
  Role role = Role::kActivation;

  friend bool operator==(const QrzContents&, const QrzContents&) = default;
};

Bytes EncodeQrz(const CompressedTensor& tensor, const ScaleSet& scales, Role role);
QrzContents DecodeQrz(std::span<const std::uint8_t> bytes);

struct BaseTensorFile {
  BaseTensor tensor;
  ScaleSet scales;

  friend bool operator==(const BaseTensorFile&, const BaseTensorFile&) = default;
};

Bytes EncodeBaseTensor(const BaseTensor& tensor, const ScaleSet& scales);
BaseTensorFile DecodeBaseTensor(std::span<const std::uint8_t> bytes);

Bytes EncodeScaleSet(const ScaleSet& scales);
ScaleSet DecodeScaleSet(std::span<const std::uint8_t> bytes);

Bytes WriteTensorContainer(const TensorF& tensor);
TensorF ReadTensorContainer(std::span<const std::uint8_t> bytes);

enum class FileKind { kUnknown, kTensor, kCompressed, kBaseTensor, kScales };
FileKind SniffKind(std::span<const std::uint8_t> bytes);

// Exact rational target_bits + flag_bits / group_size, reduced.
struct EffectiveBits {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;

  double value() const {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  friend bool operator==(const EffectiveBits&, const EffectiveBits&) = default;
};

EffectiveBits ComputeEffectiveBits(unsigned target_bits, unsigned flag_bits,
                                   std::uint64_t group_size);

// Bits in the flag and element sections before byte padding:
// sum over groups of flag_bits + length * target_bits.
std::uint64_t PayloadBits(const CompressedTensor& tensor);

Bytes ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace razor
