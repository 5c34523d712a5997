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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "razor/error.hpp"
#include "razor/quantizer.hpp"

namespace razor {
namespace {

double Fraction(std::uint64_t part, std::uint64_t whole) {
  return whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole);
}

// Symmetric absmax quantize/dequantize of one block, in place into `out`.
// Returns the number of zero codes.
std::uint64_t AbsmaxBlock(std::span<const float> x, unsigned bits, std::span<double> out) {
  double absmax = 0.0;
  for (float v : x) absmax = std::max(absmax, std::fabs(static_cast<double>(v)));
  if (absmax == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return x.size();
  }
  const double levels = std::ldexp(1.0, static_cast<int>(bits) - 1) - 1.0;
  const double scale = absmax / levels;
  std::uint64_t zeros = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double code = std::clamp(std::round(x[i] / scale), -levels, levels);
    if (code == 0.0) ++zeros;
    const double recon = code * scale;
    out[i] = std::clamp(recon, -absmax, absmax);
  }
  return zeros;
}

void CheckTensor(const TensorF& t) {
  if (NumElements(t.shape) != t.data.size()) {
    Fail(ErrorCode::kShapeMismatch, "tensor data length does not match its shape");
  }
}

std::uint64_t CountZeros(std::span<const float> x) {
  return static_cast<std::uint64_t>(std::count(x.begin(), x.end(), 0.0f));
}

}  // namespace

std::uint64_t LeadingOneHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), zero_groups);
}

double LeadingOneHistogram::FractionAbove(unsigned order) const {
  std::uint64_t above = 0;
  for (std::size_t i = order; i < counts.size(); ++i) above += counts[i];
  return Fraction(above, total());
}

LeadingOneHistogram ComputeLeadingOneHistogram(const BaseTensor& base,
                                               std::size_t group_size, Role role) {
  if (NumElements(base.shape) != base.values.size()) {
    Fail(ErrorCode::kShapeMismatch, "tensor data length does not match its shape");
  }
  const GroupLayout layout(base.shape, group_size);
  LeadingOneHistogram h;
  h.role = role;
  h.group_size = group_size;
  h.base_bits = base.base_bits;
  h.counts.assign(base.base_bits - 1, 0);
  for (std::size_t g = 0; g < layout.group_count(); ++g) {
    const auto group =
        std::span(base.values).subspan(layout.offset(g), layout.length(g));
    const std::optional<unsigned> p = DetectRazoringPoint(group);
    if (!p) {
      ++h.zero_groups;
    } else if (*p < h.counts.size()) {
      ++h.counts[*p];
    } else {
      Fail(ErrorCode::kInvariantViolation, "magnitude exceeds base precision");
    }
  }
  return h;
}

ErrorReport MeasureError(std::span<const float> x, std::span<const double> x_hat) {
  if (x.size() != x_hat.size()) Fail(ErrorCode::kShapeMismatch, "length mismatch");
  ErrorReport r;
  double signal = 0.0;
  double noise = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = x_hat[i] - static_cast<double>(x[i]);
    signal += static_cast<double>(x[i]) * x[i];
    noise += e * e;
    r.max_abs_err = std::max(r.max_abs_err, std::fabs(e));
  }
  r.mse = x.empty() ? 0.0 : noise / static_cast<double>(x.size());
  r.sqnr_db = noise == 0.0 ? std::numeric_limits<double>::infinity()
                           : 10.0 * std::log10(signal / noise);
  return r;
}

ErrorReport CompressionErrorReport(const TensorF& orig, const ScaleSet& scales,
                                   const SdrConfig& cfg) {
  CheckTensor(orig);
  const BaseTensor base = QuantizeBase(orig, scales);
  const CompressedTensor ct = CompressTensor(base, cfg);
  const BaseTensor recon = DecompressTensor(ct);
  const std::vector<double> x_hat = DequantizeBaseExact(recon, scales);

  ErrorReport r = MeasureError(orig.data, x_hat);
  const auto zero = [](const SignMag& e) { return e.mag == 0; };
  const std::uint64_t n = base.values.size();
  r.zero_frac_before = Fraction(std::count_if(base.values.begin(), base.values.end(), zero), n);
  r.zero_frac_after = Fraction(std::count_if(recon.values.begin(), recon.values.end(), zero), n);
  if (!ct.flags.empty()) r.max_flag = *std::max_element(ct.flags.begin(), ct.flags.end());
  else r.max_flag = 0u;
  return r;
}

std::vector<double> DmqReconstruct(const TensorF& orig, std::size_t group_size,
                                   unsigned bits) {
  CheckTensor(orig);
  if (bits < 2) Fail(ErrorCode::kConfigViolation, "DMQ needs at least 2 bits");
  const GroupLayout layout(orig.shape, group_size);
  std::vector<double> out(orig.data.size());
  for (std::size_t g = 0; g < layout.group_count(); ++g) {
    const std::size_t off = layout.offset(g);
    const std::size_t len = layout.length(g);
    AbsmaxBlock(std::span(orig.data).subspan(off, len), bits,
                std::span(out).subspan(off, len));
  }
  return out;
}

ErrorReport DmqBaseline(const TensorF& orig, std::size_t group_size, unsigned bits) {
  CheckTensor(orig);
  if (bits < 2) Fail(ErrorCode::kConfigViolation, "DMQ needs at least 2 bits");
  const GroupLayout layout(orig.shape, group_size);
  std::vector<double> out(orig.data.size());
  std::uint64_t zero_codes = 0;
  for (std::size_t g = 0; g < layout.group_count(); ++g) {
    const std::size_t off = layout.offset(g);
    const std::size_t len = layout.length(g);
    zero_codes += AbsmaxBlock(std::span(orig.data).subspan(off, len), bits,
                              std::span(out).subspan(off, len));
  }
  ErrorReport r = MeasureError(orig.data, out);
  r.zero_frac_before = Fraction(CountZeros(orig.data), orig.data.size());
  r.zero_frac_after = Fraction(zero_codes, orig.data.size());
  return r;
}

ErrorReport AbsmaxBaseline(const TensorF& orig, unsigned bits) {
  CheckTensor(orig);
  if (bits < 2) Fail(ErrorCode::kConfigViolation, "absmax baseline needs at least 2 bits");
  std::vector<double> out(orig.data.size());
  const std::uint64_t zero_codes = AbsmaxBlock(orig.data, bits, out);
  ErrorReport r = MeasureError(orig.data, out);
  r.zero_frac_before = Fraction(CountZeros(orig.data), orig.data.size());
  r.zero_frac_after = Fraction(zero_codes, orig.data.size());
  return r;
}

CostReport OpsCost(std::uint64_t m, std::uint64_t n, std::uint64_t h, std::uint64_t g) {
  if (m == 0 || n == 0 || h == 0 || g == 0) {
    Fail(ErrorCode::kConfigViolation, "M, N, H and G must be positive");
  }
  CostReport c;
  const std::uint64_t mn = m * n;
  c.hadamard_single_flops = mn;
  c.hadamard_heads_flops = h * mn;
  std::uint64_t groups = 0;
  if (mn % g == 0) {
    groups = mn / g;
  } else {
    groups = m * ((n + g - 1) / g);
    c.exact = false;
  }
  c.sdr_compression_iops = 2 * groups;
  c.barrel_shifter_iops = groups;
  // Per-row grouping: full groups of G plus a tail of N mod G.
  const std::uint64_t full = n / g;
  const std::uint64_t tail = n % g;
  const std::uint64_t or_ops = m * (full * (g - 1) + (tail ? tail - 1 : 0));
  c.sdr_per_element_iops = or_ops + 2 * mn;
  return c;
}

TensorF SyntheticNormal(const Shape& shape, std::uint64_t seed, double outlier_fraction,
                        double outlier_scale) {
  TensorF t{shape, std::vector<float>(NumElements(shape))};
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  for (float& v : t.data) v = normal(rng);
  if (outlier_fraction > 0.0 && !t.data.empty()) {
    const auto k = static_cast<std::size_t>(
        std::llround(outlier_fraction * static_cast<double>(t.data.size())));
    std::vector<std::size_t> idx(t.data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates: the first k entries become the outlier positions.
    for (std::size_t i = 0; i < std::min(k, idx.size()); ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
      t.data[idx[i]] = static_cast<float>(t.data[idx[i]] * outlier_scale);
    }
  }
  return t;
}

}  // namespace razor
