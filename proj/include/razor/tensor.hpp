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

// Core value types shared by every stage of the pipeline.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace razor {

using Shape = std::vector<std::size_t>;

// Product of all dimensions; 1 for a rank-0 shape.
std::size_t NumElements(std::span<const std::size_t> shape);

// Row-major float tensor. Every value must be finite.
struct TensorF {
  Shape shape;
  std::vector<float> data;

  friend bool operator==(const TensorF&, const TensorF&) = default;
};

enum class Role : std::uint8_t {
  kWeight = 0,
  kActivation = 1,
  kQuery = 2,
  kKey = 3,
  kValue = 4,
};

std::string_view RoleName(Role role);
bool ParseRole(std::string_view name, Role* role);

enum class GranularityKind : std::uint8_t { kPerTensor = 0, kPerChannel = 1 };

struct Granularity {
  GranularityKind kind = GranularityKind::kPerTensor;
  std::uint8_t axis = 0;  // meaningful only for kPerChannel

  static Granularity PerTensor() { return {}; }
  static Granularity PerChannel(std::uint8_t axis) {
    return {GranularityKind::kPerChannel, axis};
  }

  friend bool operator==(const Granularity&, const Granularity&) = default;
};

// Static absmax scale factors. scales has one entry per tensor (PerTensor) or
// one per index along the channel axis (PerChannel).
struct ScaleSet {
  Role role = Role::kActivation;
  Granularity granularity;
  unsigned base_bits = 16;
  std::vector<float> scales;

  friend bool operator==(const ScaleSet&, const ScaleSet&) = default;
};

// One sign-magnitude integer. A zero magnitude always carries sign 0.
struct SignMag {
  std::uint8_t sign = 0;
  std::uint16_t mag = 0;

  constexpr std::int64_t value() const {
    return sign ? -static_cast<std::int64_t>(mag) : static_cast<std::int64_t>(mag);
  }
  static constexpr SignMag FromValue(std::int64_t v) {
    return v < 0 ? SignMag{1, static_cast<std::uint16_t>(-v)}
                 : SignMag{0, static_cast<std::uint16_t>(v)};
  }

  friend bool operator==(const SignMag&, const SignMag&) = default;
};

// Stage-1 output: integers at base precision (magnitudes below
// 2^(base_bits-1)).
struct BaseTensor {
  Shape shape;
  unsigned base_bits = 16;
  std::vector<SignMag> values;

  friend bool operator==(const BaseTensor&, const BaseTensor&) = default;
};

constexpr std::uint32_t MaxMagnitude(unsigned base_bits) {
  return (1u << (base_bits - 1)) - 1u;
}

}  // namespace razor
