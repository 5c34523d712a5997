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

// Decompression-free integer arithmetic on SDR groups.
//
// Two groups are multiplied element by element on their narrow salient
// magnitudes (sign = XOR of signs), summed, and the sum is shifted left once by
// flag_a + flag_b. Because every product in a group pair carries the same
// shift, this equals decompress-then-multiply exactly.

#include <cstdint>
#include <vector>

#include "razor/sdr.hpp"
#include "razor/tensor.hpp"

namespace razor {

// Running sum over group pairs; |acc| stays below 2^62.
struct GroupProductAcc {
  std::int64_t acc = 0;
  unsigned max_shift = 0;  // largest flag sum folded in so far

  void Add(std::int64_t group_product, unsigned shift);
};

// Largest flag_a + flag_b the two configs can produce.
unsigned MaxPairShift(const SdrConfig& a, const SdrConfig& b);

std::int64_t MacGroup(GroupView a, const SdrConfig& a_cfg, GroupView b,
                      const SdrConfig& b_cfg);

// Decompress both groups to base precision, then accumulate full-width
// products.
std::int64_t MacGroupDecompressOracle(GroupView a, const SdrConfig& a_cfg, GroupView b,
                                      const SdrConfig& b_cfg);

// out[m][n] = <lhs row m, rhs row n>. Both operands are [rows, K] and grouped
// along K, so rhs holds weights as [out_features, in_features] or keys as
// [tokens, head_dim].
struct MatmulPlan {
  const CompressedTensor& lhs;
  const CompressedTensor& rhs;
  const ScaleSet& lhs_scales;
  const ScaleSet& rhs_scales;
};

// Throws PlanInvalid describing the first violated requirement.
void ValidatePlan(const MatmulPlan& plan);

// Integer accumulators, row-major [M, N]. Parallel over output cells.
std::vector<std::int64_t> MatmulCompressedInt(const CompressedTensor& lhs,
                                              const CompressedTensor& rhs);

// Serial oracle: decompress both operands, then a plain triple loop.
std::vector<std::int64_t> MatmulReferenceInt(const CompressedTensor& lhs,
                                             const CompressedTensor& rhs);

// Applies lhs_scale(row m) * rhs_scale(row n) to the integer result.
TensorF MatmulCompressed(const MatmulPlan& plan);

}  // namespace razor
