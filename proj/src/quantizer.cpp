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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "razor/error.hpp"

namespace razor {
namespace {

void CheckBaseBits(unsigned base_bits) {
  if (base_bits != 8 && base_bits != 16) {
    Fail(ErrorCode::kConfigViolation,
         "base precision must be 8 or 16 bits, got " + std::to_string(base_bits));
  }
}

void CheckFinite(const TensorF& t) {
  for (float v : t.data) {
    if (!std::isfinite(v)) Fail(ErrorCode::kUnsupportedValue, "non-finite tensor value");
  }
}

void CheckTensor(const TensorF& t) {
  if (NumElements(t.shape) != t.data.size()) {
    Fail(ErrorCode::kShapeMismatch, "tensor data length does not match its shape");
  }
}

}  // namespace

ScaleSlots::ScaleSlots(const Shape& shape, const ScaleSet& scales)
    : scales_(scales.scales) {
  CheckScalesFor(shape, scales);
  if (scales.granularity.kind == GranularityKind::kPerChannel) {
    per_channel_ = true;
    const std::size_t axis = scales.granularity.axis;
    extent_ = shape[axis];
    stride_ = NumElements(std::span(shape).subspan(axis + 1));
  }
}

void CheckScalesFor(const Shape& shape, const ScaleSet& scales) {
  if (scales.granularity.kind == GranularityKind::kPerTensor) {
    if (scales.scales.size() != 1) {
      Fail(ErrorCode::kShapeMismatch, "per-tensor scales must hold exactly one value");
    }
    return;
  }
  const std::size_t axis = scales.granularity.axis;
  if (axis >= shape.size()) {
    Fail(ErrorCode::kShapeMismatch, "channel axis " + std::to_string(axis) +
                                        " out of range for rank " +
                                        std::to_string(shape.size()));
  }
  if (scales.scales.size() != shape[axis]) {
    Fail(ErrorCode::kShapeMismatch,
         "expected " + std::to_string(shape[axis]) + " per-channel scales, got " +
             std::to_string(scales.scales.size()));
  }
}

ScaleSet CalibrateAbsmax(std::span<const TensorF> samples, Role role,
                         Granularity granularity, unsigned base_bits) {
  CheckBaseBits(base_bits);
  if (samples.empty()) Fail(ErrorCode::kEmptyCalibration, "no calibration samples");

  std::size_t slots = 1;
  if (granularity.kind == GranularityKind::kPerChannel) {
    const std::size_t axis = granularity.axis;
    for (const TensorF& s : samples) {
      if (axis >= s.shape.size()) {
        Fail(ErrorCode::kShapeMismatch, "calibration sample lacks the channel axis");
      }
    }
    slots = samples.front().shape[axis];
    for (const TensorF& s : samples) {
      if (s.shape[axis] != slots) {
        Fail(ErrorCode::kShapeMismatch,
             "calibration samples disagree on the channel axis size");
      }
    }
  }

  ScaleSet out{role, granularity, base_bits, std::vector<float>(slots, 1.0f)};
  std::vector<float> absmax(slots, 0.0f);
  for (const TensorF& s : samples) {
    CheckTensor(s);
    CheckFinite(s);
    const ScaleSlots map(s.shape, out);
    for (std::size_t i = 0; i < s.data.size(); ++i) {
      float& m = absmax[map.slot(i)];
      m = std::max(m, std::fabs(s.data[i]));
    }
  }

  const double extreme = MaxMagnitude(base_bits);
  for (std::size_t c = 0; c < slots; ++c) {
    if (absmax[c] == 0.0f) {
      Fail(ErrorCode::kAllZeroSlot, "absmax of scale slot " + std::to_string(c) + " is 0");
    }
    out.scales[c] = static_cast<float>(static_cast<double>(absmax[c]) / extreme);
    if (!(out.scales[c] > 0.0f)) {
      Fail(ErrorCode::kAllZeroSlot, "scale of slot " + std::to_string(c) + " underflows");
    }
  }
  return out;
}

SignMag QuantizeValue(float x, float scale, unsigned base_bits) {
  const double xd = x;
  const double sd = scale;
  const double limit = MaxMagnitude(base_bits);

  // Saturate early; anything past the grid clamps to the extreme anyway.
  const double ratio = xd / sd;
  if (ratio >= limit + 1.0) return {0, static_cast<std::uint16_t>(limit)};
  if (ratio <= -(limit + 1.0)) return {1, static_cast<std::uint16_t>(limit)};

  // Pick the candidate with the smallest exact residual; ties go to the larger
  // magnitude. q * scale and x - q * scale are exact in double here.
  const double base = std::floor(ratio);
  double best = base;
  double best_err = std::numeric_limits<double>::infinity();
  for (double cand = base - 1.0; cand <= base + 2.0; cand += 1.0) {
    const double err = std::fabs(std::fma(-cand, sd, xd));
    if (err < best_err || (err == best_err && std::fabs(cand) > std::fabs(best))) {
      best = cand;
      best_err = err;
    }
  }
  best = std::clamp(best, -limit, limit);
  return SignMag::FromValue(static_cast<std::int64_t>(best));
}

BaseTensor QuantizeBase(const TensorF& x, const ScaleSet& scales) {
  CheckBaseBits(scales.base_bits);
  CheckTensor(x);
  const ScaleSlots map(x.shape, scales);

  BaseTensor out{x.shape, scales.base_bits, std::vector<SignMag>(x.data.size())};
  const auto n = static_cast<std::ptrdiff_t>(x.data.size());
  bool finite = true;
#pragma omp parallel for schedule(static) reduction(&& : finite)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const float v = x.data[i];
    if (!std::isfinite(v)) {
      finite = false;
      continue;
    }
    out.values[i] = QuantizeValue(v, map.scale(i), scales.base_bits);
  }
  if (!finite) Fail(ErrorCode::kUnsupportedValue, "non-finite tensor value");
  return out;
}

std::vector<double> DequantizeBaseExact(const BaseTensor& q,
                                        const ScaleSet& scales) {
  if (q.base_bits != scales.base_bits) {
    Fail(ErrorCode::kShapeMismatch, "base precision of tensor and scales differ");
  }
  if (NumElements(q.shape) != q.values.size()) {
    Fail(ErrorCode::kShapeMismatch, "tensor data length does not match its shape");
  }
  const ScaleSlots map(q.shape, scales);
  std::vector<double> out(q.values.size());
  const auto n = static_cast<std::ptrdiff_t>(q.values.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = static_cast<double>(q.values[i].value()) * map.scale(i);
  }
  return out;
}

TensorF DequantizeBase(const BaseTensor& q, const ScaleSet& scales) {
  const std::vector<double> exact = DequantizeBaseExact(q, scales);
  TensorF out{q.shape, std::vector<float>(exact.size())};
  std::transform(exact.begin(), exact.end(), out.data.begin(),
                 [](double v) { return static_cast<float>(v); });
  return out;
}

float RoundToHalfPrecision(float value) {
  if (value == 0.0f || !std::isfinite(value)) return value;
  int exp = 0;
  std::frexp(value, &exp);
  // binary16: 10 stored mantissa bits, normal exponents down to -14.
  const int unbiased = std::max(exp - 1, -14);
  const double quantum = std::ldexp(1.0, unbiased - 10);
  const double rounded = std::nearbyint(value / quantum) * quantum;
  if (std::fabs(rounded) > 65504.0) return std::copysign(INFINITY, value);
  return static_cast<float>(rounded);
}

ScaleSet WithHalfPrecisionScales(ScaleSet scales) {
  for (float& s : scales.scales) {
    s = RoundToHalfPrecision(s);
    if (!(s > 0.0f) || !std::isfinite(s)) {
      Fail(ErrorCode::kConfigViolation, "scale not representable in half precision");
    }
  }
  return scales;
}

}  // namespace razor
