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

#include "razor/analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "razor/quantizer.hpp"
#include "test_util.hpp"

namespace razor {
namespace {

TEST(Histogram, UnitMagnitudes) {
  std::vector<SignMag> v(64);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = {static_cast<std::uint8_t>(i % 2), 1};
  const LeadingOneHistogram h = ComputeLeadingOneHistogram({{4, 16}, 16, v}, 16);
  ASSERT_EQ(h.counts.size(), 15u);
  EXPECT_EQ(h.counts[0], 4u);
  EXPECT_EQ(h.total(), 4u);
  EXPECT_EQ(h.FractionAbove(1), 0.0);
}

TEST(Histogram, WorkedGroup) {
  const BaseTensor t{{1, 4}, 8, {{0, 90}, {1, 12}, {0, 39}, {0, 1}}};
  const LeadingOneHistogram h = ComputeLeadingOneHistogram(t, 4, Role::kWeight);
  ASSERT_EQ(h.counts.size(), 7u);
  EXPECT_EQ(h.counts[6], 1u);
  EXPECT_EQ(h.role, Role::kWeight);
  EXPECT_EQ(h.FractionAbove(6), 1.0);
  EXPECT_EQ(h.FractionAbove(7), 0.0);
}

TEST(Histogram, ZeroGroups) {
  const BaseTensor t{{2, 8}, 16, std::vector<SignMag>(16)};
  const LeadingOneHistogram h = ComputeLeadingOneHistogram(t, 4);
  EXPECT_EQ(h.zero_groups, 4u);
  EXPECT_EQ(h.total(), 4u);
  for (std::uint64_t c : h.counts) EXPECT_EQ(c, 0u);
}

TEST(HistogramProperty, DoublingShiftsOneBucket) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    BaseTensor t = testing::RandomBaseTensor(rng, {8, 64}, 15, 16);
    t.base_bits = 16;
    BaseTensor doubled = t;
    for (SignMag& e : doubled.values) e.mag = static_cast<std::uint16_t>(e.mag * 2);
    const LeadingOneHistogram a = ComputeLeadingOneHistogram(t, 16);
    const LeadingOneHistogram b = ComputeLeadingOneHistogram(doubled, 16);
    EXPECT_EQ(a.zero_groups, b.zero_groups);
    EXPECT_EQ(b.counts[0], 0u);
    for (std::size_t k = 0; k + 1 < a.counts.size(); ++k) EXPECT_EQ(a.counts[k], b.counts[k + 1]);
  }
}

TEST(Dmq, WorkedGroup) {
  const TensorF t{{1, 4}, {90.0f, -12.0f, 39.0f, 1.0f}};
  const std::vector<double> r = DmqReconstruct(t, 4, 4);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_NEAR(r[0], 90.0, 1e-5);
  EXPECT_NEAR(r[1], -12.857142857, 1e-5);
  EXPECT_NEAR(r[2], 38.571428571, 1e-5);
  EXPECT_EQ(r[3], 0.0);
  const ErrorReport e = DmqBaseline(t, 4, 4);
  EXPECT_FALSE(e.max_flag.has_value());
  EXPECT_EQ(e.zero_frac_after, 0.25);
}

TEST(Dmq, ConstantGroupIsExact) {
  const TensorF t{{2, 4}, {3.5f, 3.5f, 3.5f, 3.5f, -2.0f, -2.0f, -2.0f, -2.0f}};
  const ErrorReport e = DmqBaseline(t, 4, 4);
  EXPECT_EQ(e.mse, 0.0);
  EXPECT_TRUE(std::isinf(e.sqnr_db));
}

TEST(DmqProperty, GroupingNeverWorseAndBounded) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TensorF t = SyntheticNormal({16, 64}, seed, 0.01);
    const ErrorReport grouped = DmqBaseline(t, 16, 4);
    const ErrorReport whole = AbsmaxBaseline(t, 4);
    EXPECT_LE(grouped.mse, whole.mse) << seed;
    const std::vector<double> r = DmqReconstruct(t, 16, 4);
    for (std::size_t g = 0; g < r.size(); g += 16) {
      double amax = 0.0;
      for (std::size_t i = g; i < g + 16; ++i) amax = std::max(amax, std::fabs(double{t.data[i]}));
      for (std::size_t i = g; i < g + 16; ++i) ASSERT_LE(std::fabs(r[i]), amax * (1 + 1e-12));
    }
  }
}

TEST(OpsCost, ReferenceShapes) {
  const CostReport a = OpsCost(128, 64, 8, 32);
  EXPECT_EQ(a.hadamard_single_flops, 8192u);
  EXPECT_EQ(a.hadamard_heads_flops, 65536u);
  EXPECT_EQ(a.sdr_compression_iops, 512u);
  EXPECT_EQ(a.barrel_shifter_iops, 256u);
  EXPECT_TRUE(a.exact);
  EXPECT_EQ(a.sdr_per_element_iops, 8192u - 256u + 2u * 8192u);

  const CostReport b = OpsCost(256, 64, 8, 32);
  EXPECT_EQ(b.hadamard_single_flops, 16384u);
  EXPECT_EQ(b.hadamard_heads_flops, 131072u);
  EXPECT_EQ(b.sdr_compression_iops, 1024u);
  EXPECT_EQ(b.barrel_shifter_iops, 512u);

  for (std::uint64_t g : {1u, 7u, 32u}) {
    const CostReport one = OpsCost(1, g, 1, g);
    EXPECT_EQ(one.sdr_compression_iops, 2u);
    EXPECT_EQ(one.barrel_shifter_iops, 1u);
    EXPECT_EQ(one.hadamard_single_flops, g);
  }
}

TEST(OpsCost, RaggedCountsPerRow) {
  const CostReport r = OpsCost(3, 5, 2, 4);
  EXPECT_FALSE(r.exact);
  EXPECT_EQ(r.barrel_shifter_iops, 6u);
  EXPECT_EQ(r.sdr_compression_iops, 12u);
  EXPECT_EQ(r.hadamard_heads_flops, 30u);
}

TEST(OpsCostProperty, Linearity) {
  for (std::uint64_t m : {32u, 64u, 128u}) {
    for (std::uint64_t h : {1u, 4u, 8u}) {
      const CostReport c = OpsCost(m, 64, h, 32);
      EXPECT_EQ(c.hadamard_heads_flops, h * c.hadamard_single_flops);
      EXPECT_EQ(c.sdr_compression_iops, 2 * c.barrel_shifter_iops);
      // Rotation work per SDR op grows with the head count and the group size.
      EXPECT_EQ(c.hadamard_heads_flops, c.barrel_shifter_iops * h * 32);
      EXPECT_EQ(OpsCost(2 * m, 64, h, 32).sdr_compression_iops, 2 * c.sdr_compression_iops);
    }
  }
}

TEST(ErrorReport, ZeroTensor) {
  const TensorF t{{2, 16}, std::vector<float>(32, 0.0f)};
  const ScaleSet s{Role::kActivation, {}, 16, {1.0f}};
  const ErrorReport e = CompressionErrorReport(t, s, SdrConfig::Make(16, 4, 16));
  EXPECT_EQ(e.mse, 0.0);
  EXPECT_EQ(e.max_abs_err, 0.0);
  EXPECT_EQ(e.zero_frac_before, 1.0);
  EXPECT_EQ(e.zero_frac_after, 1.0);
  EXPECT_TRUE(std::isinf(e.sqnr_db));
  ASSERT_TRUE(e.max_flag.has_value());
  EXPECT_EQ(*e.max_flag, 0u);
}

TEST(ErrorReport, OnGridValuesAreExact) {
  // Small integers on the scale grid fit the salient width unchanged.
  const TensorF t{{1, 8}, {0.0f, 0.25f, -0.5f, 1.25f, 1.75f, -1.0f, 0.75f, 0.5f}};
  const ScaleSet s{Role::kActivation, {}, 8, {0.25f}};
  const ErrorReport e = CompressionErrorReport(t, s, SdrConfig::Make(8, 4, 8));
  EXPECT_EQ(e.mse, 0.0);
  EXPECT_EQ(*e.max_flag, 0u);
  EXPECT_EQ(e.zero_frac_before, 0.125);
}

TEST(ErrorReportProperty, MaxErrorWithinFlagBound) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TensorF t = SyntheticNormal({8, 128}, seed, 0.001);
    const ScaleSet s = CalibrateAbsmax(std::span(&t, 1), Role::kActivation,
                                       Granularity::PerTensor(), 16);
    const ErrorReport e = CompressionErrorReport(t, s, SdrConfig::Make(16, 4, 16));
    ASSERT_TRUE(e.max_flag.has_value());
    const double bound = double{s.scales[0]} * (0.5 + std::ldexp(1.0, *e.max_flag));
    EXPECT_LE(e.max_abs_err, bound * (1 + 1e-6)) << seed;
    EXPECT_GE(e.zero_frac_after, e.zero_frac_before);
  }
}

TEST(Measure, Basics) {
  const std::vector<float> x{1.0f, -2.0f, 0.0f, 4.0f};
  const std::vector<double> y{1.0, -1.0, 0.0, 2.0};
  const ErrorReport e = MeasureError(x, y);
  EXPECT_DOUBLE_EQ(e.mse, 5.0 / 4.0);
  EXPECT_EQ(e.max_abs_err, 2.0);
  EXPECT_NEAR(e.sqnr_db, 10.0 * std::log10(21.0 / 5.0), 1e-12);
}

TEST(Synthetic, DeterministicWithExactOutlierCount) {
  const TensorF a = SyntheticNormal({64, 64}, 7, 0.01, 100.0);
  const TensorF b = SyntheticNormal({64, 64}, 7, 0.01, 100.0);
  EXPECT_EQ(a.data, b.data);
  const TensorF clean = SyntheticNormal({64, 64}, 7);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) changed += a.data[i] != clean.data[i];
  EXPECT_LE(changed, 41u);
  EXPECT_GE(changed, 40u);
}

}  // namespace
}  // namespace razor
