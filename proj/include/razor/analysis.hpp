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

// Measurement tooling: leading-one statistics, reconstruction error, a
// per-group absmax (DMQ) baseline and the rotation-vs-SDR operation counts.

#include <cstdint>
#include <optional>
#include <vector>

#include "razor/sdr.hpp"
#include "razor/tensor.hpp"

namespace razor {

// Razoring points of every group, counted by 1-based bit order from the LSB
// (bit index 0 is order 1). All-zero groups land in zero_groups.
struct LeadingOneHistogram {
  Role role = Role::kActivation;
  std::size_t group_size = 0;
  unsigned base_bits = 16;
  std::vector<std::uint64_t> counts;  // counts[order - 1], order in [1, base_bits - 1]
  std::uint64_t zero_groups = 0;

  std::uint64_t total() const;
  // Share of all groups whose order is strictly greater than `order`.
  double FractionAbove(unsigned order) const;
};

LeadingOneHistogram ComputeLeadingOneHistogram(const BaseTensor& base,
                                               std::size_t group_size,
                                               Role role = Role::kActivation);

struct ErrorReport {
  double mse = 0.0;
  double max_abs_err = 0.0;
  double sqnr_db = 0.0;  // +inf when the noise power is zero
  double zero_frac_before = 0.0;
  double zero_frac_after = 0.0;
  std::optional<unsigned> max_flag;  // SDR reports only
};

// Float-domain error of x versus x_hat, both over the same elements.
ErrorReport MeasureError(std::span<const float> x, std::span<const double> x_hat);

// quantize -> compress -> decompress -> dequantize. Zero fractions count zero
// base integers before and zero reconstructed integers after compression.
ErrorReport CompressionErrorReport(const TensorF& orig, const ScaleSet& scales,
                                   const SdrConfig& cfg);

// Per-group absmax symmetric quantization to `bits` with real-valued scales,
// grouped along the last axis like SDR. Zero fractions compare zero inputs
// with zero codes.
ErrorReport DmqBaseline(const TensorF& orig, std::size_t group_size, unsigned bits);

// Same quantizer with one scale for the whole tensor.
ErrorReport AbsmaxBaseline(const TensorF& orig, unsigned bits);

// Reconstruction produced by DmqBaseline, exposed for inspection.
std::vector<double> DmqReconstruct(const TensorF& orig, std::size_t group_size,
                                   unsigned bits);

struct CostReport {
  std::uint64_t hadamard_single_flops = 0;  // M * N
  std::uint64_t hadamard_heads_flops = 0;   // H * M * N
  std::uint64_t sdr_compression_iops = 0;   // 2 * groups
  std::uint64_t barrel_shifter_iops = 0;    // groups
  // false when G does not divide M * N; groups are then counted per row as
  // M * ceil(N / G).
  bool exact = true;
  // Extension beyond the closed form: (len - 1) ORs per group for the
  // razoring point plus a truncate and a round per element.
  std::uint64_t sdr_per_element_iops = 0;
};

CostReport OpsCost(std::uint64_t m, std::uint64_t n, std::uint64_t h, std::uint64_t g);

// iid N(0, 1) samples; if outlier_fraction > 0, round(outlier_fraction * n)
// distinct positions are multiplied by outlier_scale.
TensorF SyntheticNormal(const Shape& shape, std::uint64_t seed,
                        double outlier_fraction = 0.0, double outlier_scale = 100.0);

}  // namespace razor
