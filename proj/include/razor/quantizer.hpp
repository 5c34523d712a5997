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

// Stage 1: static absolute-max quantization to sign-magnitude integers at a
// base precision of 8 or 16 bits.
//
//   scale   = |x_max| / (2^(b-1) - 1)
//   q       = clamp(round(x / scale), -(2^(b-1) - 1), 2^(b-1) - 1)
//   x_hat   = q * scale
//
// round() is round-half-away-from-zero, decided on the exact residual so the
// half-step bound |x_hat - x| <= scale / 2 holds without floating-point slop.

#include <span>
#include <vector>

#include "razor/tensor.hpp"

namespace razor {

// Maps a row-major flat index to its scale slot.
class ScaleSlots {
 public:
  ScaleSlots(const Shape& shape, const ScaleSet& scales);

  std::size_t slot(std::size_t flat_index) const {
    return per_channel_ ? (flat_index / stride_) % extent_ : 0;
  }
  float scale(std::size_t flat_index) const { return scales_[slot(flat_index)]; }

 private:
  bool per_channel_ = false;
  std::size_t stride_ = 1;
  std::size_t extent_ = 1;
  std::span<const float> scales_;
};

// Throws ShapeMismatch when `scales` cannot be applied to `shape`.
void CheckScalesFor(const Shape& shape, const ScaleSet& scales);

ScaleSet CalibrateAbsmax(std::span<const TensorF> samples, Role role,
                         Granularity granularity, unsigned base_bits);

// Quantizes one value against one scale.
SignMag QuantizeValue(float x, float scale, unsigned base_bits);

BaseTensor QuantizeBase(const TensorF& x, const ScaleSet& scales);

TensorF DequantizeBase(const BaseTensor& q, const ScaleSet& scales);

// Same as DequantizeBase without the final narrowing to float. q * scale is
// exact in double for every base precision.
std::vector<double> DequantizeBaseExact(const BaseTensor& q,
                                        const ScaleSet& scales);

// Rounds a scale to the nearest binary16 value (ties to even). Used by the
// half-precision scale mode.
float RoundToHalfPrecision(float value);

ScaleSet WithHalfPrecisionScales(ScaleSet scales);

}  // namespace razor
