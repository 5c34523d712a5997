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

#include "razor/quantizer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "razor/error.hpp"
#include "test_util.hpp"

namespace razor {
namespace {

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected razor::Error";
  return ErrorCode::kIoError;
}

TensorF Tensor(Shape shape, std::vector<float> data) { return {std::move(shape), std::move(data)}; }

TEST(Calibrate, PerTensorAbsmax) {
  const TensorF x = Tensor({3}, {0.5f, -1.0f, 0.25f});
  const ScaleSet s = CalibrateAbsmax(std::span(&x, 1), Role::kActivation,
                                     Granularity::PerTensor(), 8);
  ASSERT_EQ(s.scales.size(), 1u);
  EXPECT_EQ(s.scales[0], static_cast<float>(1.0 / 127.0));
  EXPECT_EQ(s.base_bits, 8u);
}

TEST(Calibrate, MaxOverSamples) {
  const std::vector<TensorF> xs = {Tensor({1}, {1.0f}), Tensor({1}, {-3.0f})};
  const ScaleSet s = CalibrateAbsmax(xs, Role::kActivation, Granularity::PerTensor(), 16);
  EXPECT_EQ(s.scales[0], static_cast<float>(3.0 / 32767.0));
}

TEST(Calibrate, AbsmaxMapsToExtreme) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> c_dist(1e-3f, 1e3f);
  for (int i = 0; i < 200; ++i) {
    const float c = c_dist(rng);
    const TensorF x = Tensor({2}, {c, -c});
    for (unsigned bits : {8u, 16u}) {
      const ScaleSet s = CalibrateAbsmax(std::span(&x, 1), Role::kKey,
                                         Granularity::PerTensor(), bits);
      const BaseTensor q = QuantizeBase(x, s);
      EXPECT_EQ(q.values[0], (SignMag{0, static_cast<std::uint16_t>(MaxMagnitude(bits))}));
      EXPECT_EQ(q.values[1], (SignMag{1, static_cast<std::uint16_t>(MaxMagnitude(bits))}));
    }
  }
}

TEST(Calibrate, PerChannelAlongRows) {
  const TensorF w = Tensor({2, 3}, {1.0f, -2.0f, 0.5f, 0.0f, 0.25f, -0.125f});
  const ScaleSet s =
      CalibrateAbsmax(std::span(&w, 1), Role::kWeight, Granularity::PerChannel(0), 8);
  ASSERT_EQ(s.scales.size(), 2u);
  EXPECT_EQ(s.scales[0], static_cast<float>(2.0 / 127.0));
  EXPECT_EQ(s.scales[1], static_cast<float>(0.25 / 127.0));
}

TEST(Calibrate, Errors) {
  EXPECT_EQ(CodeOf([] {
              CalibrateAbsmax({}, Role::kActivation, Granularity::PerTensor(), 8);
            }),
            ErrorCode::kEmptyCalibration);
  const TensorF zeros = Tensor({2}, {0.0f, 0.0f});
  EXPECT_EQ(CodeOf([&] {
              CalibrateAbsmax(std::span(&zeros, 1), Role::kActivation,
                              Granularity::PerTensor(), 8);
            }),
            ErrorCode::kAllZeroSlot);
  const TensorF row_zero = Tensor({2, 1}, {1.0f, 0.0f});
  EXPECT_EQ(CodeOf([&] {
              CalibrateAbsmax(std::span(&row_zero, 1), Role::kWeight,
                              Granularity::PerChannel(0), 8);
            }),
            ErrorCode::kAllZeroSlot);
  const std::vector<TensorF> mismatch = {Tensor({2, 1}, {1.0f, 1.0f}),
                                         Tensor({3, 1}, {1.0f, 1.0f, 1.0f})};
  EXPECT_EQ(CodeOf([&] {
              CalibrateAbsmax(mismatch, Role::kWeight, Granularity::PerChannel(0), 8);
            }),
            ErrorCode::kShapeMismatch);
  const TensorF one = Tensor({1}, {1.0f});
  EXPECT_EQ(CodeOf([&] {
              CalibrateAbsmax(std::span(&one, 1), Role::kActivation,
                              Granularity::PerTensor(), 12);
            }),
            ErrorCode::kConfigViolation);
}

TEST(Quantize, WorkedExample) {
  const TensorF x = Tensor({3}, {0.5f, -1.0f, 0.25f});
  const ScaleSet s{Role::kActivation, {}, 8, {static_cast<float>(1.0 / 127.0)}};
  const BaseTensor q = QuantizeBase(x, s);
  EXPECT_EQ(q.values[0].value(), 64);
  EXPECT_EQ(q.values[1].value(), -127);
  EXPECT_EQ(q.values[2].value(), 32);
}

TEST(Quantize, ZerosAndClamp) {
  const ScaleSet s{Role::kActivation, {}, 8, {static_cast<float>(1.0 / 127.0)}};
  const BaseTensor z = QuantizeBase(Tensor({4}, {0.0f, -0.0f, 0.0f, 0.0f}), s);
  for (const SignMag& e : z.values) EXPECT_EQ(e, (SignMag{0, 0}));
  EXPECT_EQ(QuantizeBase(Tensor({1}, {2.0f}), s).values[0].value(), 127);
  EXPECT_EQ(QuantizeBase(Tensor({1}, {-1e30f}), s).values[0].value(), -127);
}

TEST(Quantize, TiesRoundAwayFromZero) {
  // Power-of-two scale makes x / scale an exact half.
  const ScaleSet s{Role::kActivation, {}, 8, {0.5f}};
  const BaseTensor q = QuantizeBase(Tensor({4}, {0.25f, -0.25f, 0.75f, -0.75f}), s);
  EXPECT_EQ(q.values[0].value(), 1);
  EXPECT_EQ(q.values[1].value(), -1);
  EXPECT_EQ(q.values[2].value(), 2);
  EXPECT_EQ(q.values[3].value(), -2);
}

TEST(Quantize, RejectsShapeMismatch) {
  const ScaleSet s{Role::kWeight, Granularity::PerChannel(0), 8, {1.0f, 1.0f}};
  EXPECT_EQ(CodeOf([&] { QuantizeBase(Tensor({3, 1}, {1, 1, 1}), s); }),
            ErrorCode::kShapeMismatch);
  const ScaleSet t{Role::kActivation, {}, 8, {1.0f}};
  EXPECT_EQ(CodeOf([&] { QuantizeBase(Tensor({3}, {1, 1}), t); }),
            ErrorCode::kShapeMismatch);
}

TEST(Dequantize, Examples) {
  const float s127 = static_cast<float>(1.0 / 127.0);
  const ScaleSet s{Role::kActivation, {}, 8, {s127}};
  EXPECT_EQ(DequantizeBase(BaseTensor{{1}, 8, {{0, 127}}}, s).data[0], 1.0f);

  const BaseTensor q{{3}, 8, {{0, 64}, {1, 127}, {0, 32}}};
  const TensorF x = DequantizeBase(q, s);
  const float orig[] = {0.5f, -1.0f, 0.25f};
  for (int i = 0; i < 3; ++i) EXPECT_LE(std::fabs(x.data[i] - orig[i]), 1.0 / 254.0);
  EXPECT_NEAR(x.data[0], 0.50393701, 1e-7);
  EXPECT_NEAR(x.data[2], 0.25196850, 1e-7);

  const TensorF zero = DequantizeBase(BaseTensor{{2}, 8, {{0, 0}, {0, 0}}}, s);
  EXPECT_EQ(zero.data, (std::vector<float>{0.0f, 0.0f}));
}

TEST(QuantizeProperty, HalfStepBound) {
  std::mt19937_64 rng(11);
  for (unsigned bits : {8u, 16u}) {
    for (int trial = 0; trial < 50; ++trial) {
      TensorF x{{16, 24}, testing::RandomFloats(rng, 16 * 24, -5.0f, 5.0f)};
      for (auto gran : {Granularity::PerTensor(), Granularity::PerChannel(0),
                        Granularity::PerChannel(1)}) {
        const ScaleSet s = CalibrateAbsmax(std::span(&x, 1), Role::kActivation, gran, bits);
        const BaseTensor q = QuantizeBase(x, s);
        const std::vector<double> exact = DequantizeBaseExact(q, s);
        const TensorF narrowed = DequantizeBase(q, s);
        const ScaleSlots slots(x.shape, s);
        for (std::size_t i = 0; i < x.data.size(); ++i) {
          const double scale = slots.scale(i);
          ASSERT_LE(std::fabs(exact[i] - x.data[i]), 0.5 * scale);
          const double ulp = std::nextafter(std::fabs(narrowed.data[i]), INFINITY) -
                             std::fabs(narrowed.data[i]);
          ASSERT_LE(std::fabs(narrowed.data[i] - x.data[i]), 0.5 * scale + 0.5 * ulp);
        }
      }
    }
  }
}

TEST(QuantizeProperty, SignSymmetric) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    TensorF x{{64}, testing::RandomFloats(rng, 64, -3.0f, 3.0f)};
    TensorF neg = x;
    for (float& v : neg.data) v = -v;
    const ScaleSet s = CalibrateAbsmax(std::span(&x, 1), Role::kQuery,
                                       Granularity::PerTensor(), trial % 2 ? 8 : 16);
    const BaseTensor a = QuantizeBase(x, s);
    const BaseTensor b = QuantizeBase(neg, s);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      ASSERT_EQ(a.values[i].value(), -b.values[i].value());
    }
  }
}

TEST(QuantizeProperty, SizeOneChannelEqualsPerTensor) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    TensorF x{{1, 40}, testing::RandomFloats(rng, 40, -2.0f, 2.0f)};
    const ScaleSet pt = CalibrateAbsmax(std::span(&x, 1), Role::kWeight,
                                        Granularity::PerTensor(), 8);
    const ScaleSet pc = CalibrateAbsmax(std::span(&x, 1), Role::kWeight,
                                        Granularity::PerChannel(0), 8);
    EXPECT_EQ(pt.scales, pc.scales);
    EXPECT_EQ(QuantizeBase(x, pt), QuantizeBase(x, pc));
  }
}

TEST(QuantizeProperty, Base16AbsoluteBound) {
  std::mt19937_64 rng(14);
  std::vector<TensorF> calib;
  for (int i = 0; i < 4; ++i) calib.push_back({{256}, testing::RandomFloats(rng, 256, -8.0f, 8.0f)});
  const ScaleSet s = CalibrateAbsmax(calib, Role::kActivation, Granularity::PerTensor(), 16);
  double absmax = 0.0;
  for (const auto& t : calib) {
    for (float v : t.data) absmax = std::max(absmax, std::fabs(double{v}));
  }
  for (const auto& t : calib) {
    const std::vector<double> back = DequantizeBaseExact(QuantizeBase(t, s), s);
    for (std::size_t i = 0; i < back.size(); ++i) {
      // |x_hat - x| <= |Xmax| / (2 * 32767), up to the f32 rounding of the scale.
      ASSERT_LE(std::fabs(back[i] - t.data[i]), 0.5 * s.scales[0]);
      ASSERT_LE(std::fabs(back[i] - t.data[i]), absmax / (2.0 * 32767.0) * (1.0 + 1e-6));
    }
  }
}

TEST(HalfPrecisionScales, MatchesBinary16Rounding) {
  // Expected values from numpy.float16.
  EXPECT_EQ(RoundToHalfPrecision(static_cast<float>(1.0 / 127.0)), 0x1.02p-7f);
  EXPECT_EQ(RoundToHalfPrecision(static_cast<float>(3.0 / 32767.0)), 0x1.8p-14f);
  EXPECT_EQ(RoundToHalfPrecision(1e-6f), 0x1.1p-20f);
  EXPECT_EQ(RoundToHalfPrecision(0.1f), 0x1.998p-4f);
  EXPECT_EQ(RoundToHalfPrecision(65519.0f), 65504.0f);
  EXPECT_TRUE(std::isinf(RoundToHalfPrecision(65520.0f)));

  ScaleSet s{Role::kActivation, {}, 16, {static_cast<float>(1.0 / 127.0)}};
  EXPECT_EQ(WithHalfPrecisionScales(s).scales[0], 0x1.02p-7f);
  s.scales[0] = 1e9f;
  EXPECT_EQ(CodeOf([&] { WithHalfPrecisionScales(s); }), ErrorCode::kConfigViolation);
}

}  // namespace
}  // namespace razor
