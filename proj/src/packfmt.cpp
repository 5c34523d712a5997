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

#include "razor/packfmt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "bitstream.hpp"
#include "razor/error.hpp"
#include "razor/quantizer.hpp"

namespace razor {
namespace {

using detail::BitReader;
using detail::BitWriter;
using detail::ByteReader;
using detail::ByteWriter;

constexpr std::string_view kTensorMagic = "FTN1";
constexpr std::string_view kQrzMagic = "QRZ1";
constexpr std::string_view kBaseMagic = "QBT1";
constexpr std::string_view kScalesMagic = "QRZM";

void ExpectMagic(ByteReader& in, std::string_view magic) {
  // A short prefix of the right magic is a truncated stream, not a foreign one.
  const std::size_t n = std::min(in.remaining(), magic.size());
  auto got = in.Take(n);
  if (!std::equal(got.begin(), got.end(), magic.begin())) {
    Fail(ErrorCode::kBadMagic, "expected magic " + std::string(magic));
  }
  if (n < magic.size()) {
    Fail(ErrorCode::kTruncatedStream, "stream ends inside magic " + std::string(magic));
  }
}

void ExpectVersion(ByteReader& in) {
  const std::uint16_t v = in.U16();
  if (v != kFormatVersion) {
    Fail(ErrorCode::kBadVersion, "unsupported version " + std::to_string(v));
  }
}

void ExpectEnd(const ByteReader& in) {
  if (in.remaining() != 0) {
    Fail(ErrorCode::kInvariantViolation,
         std::to_string(in.remaining()) + " trailing bytes after payload");
  }
}

void PutShape(ByteWriter& w, const Shape& shape) {
  if (shape.size() > 255) Fail(ErrorCode::kInvariantViolation, "rank above 255");
  w.U8(static_cast<std::uint8_t>(shape.size()));
  for (std::size_t d : shape) w.U64(d);
}

// Reads ndim + dims and returns the element count, rejecting counts that could
// not possibly fit in the remaining stream.
Shape GetShape(ByteReader& in, std::size_t* count) {
  const std::uint8_t ndim = in.U8();
  Shape shape(ndim);
  std::uint64_t n = 1;
  bool overflow = false;
  for (auto& d : shape) {
    const std::uint64_t v = in.U64();
    if (v > std::numeric_limits<std::size_t>::max()) overflow = true;
    d = static_cast<std::size_t>(v);
    if (v != 0 && n > std::numeric_limits<std::uint64_t>::max() / v) overflow = true;
    n *= v;
  }
  if (overflow || n > (std::uint64_t{1} << 48)) {
    Fail(ErrorCode::kTruncatedStream, "declared element count exceeds any stream");
  }
  *count = static_cast<std::size_t>(n);
  return shape;
}

std::size_t SectionBytes(std::uint64_t fields, unsigned width) {
  return static_cast<std::size_t>((fields * width + 7) / 8);
}

void PutScaleHeader(ByteWriter& w, const ScaleSet& s) {
  w.U8(static_cast<std::uint8_t>(s.granularity.kind));
  w.U8(s.granularity.axis);
}

Granularity GetGranularity(ByteReader& in) {
  const std::uint8_t kind = in.U8();
  const std::uint8_t axis = in.U8();
  if (kind > 1) Fail(ErrorCode::kInvariantViolation, "unknown granularity " + std::to_string(kind));
  return {static_cast<GranularityKind>(kind), axis};
}

Role GetRole(ByteReader& in) {
  const std::uint8_t r = in.U8();
  if (r > 4) Fail(ErrorCode::kInvariantViolation, "unknown role " + std::to_string(r));
  return static_cast<Role>(r);
}

void PutScales(ByteWriter& w, const std::vector<float>& scales) {
  w.U32(static_cast<std::uint32_t>(scales.size()));
  for (float s : scales) w.F32(s);
}

std::vector<float> GetScales(ByteReader& in) {
  const std::uint32_t n = in.U32();
  if (static_cast<std::uint64_t>(n) * 4 > in.remaining()) {
    Fail(ErrorCode::kTruncatedStream, "scale table runs past end of stream");
  }
  std::vector<float> scales(n);
  for (float& s : scales) {
    s = in.F32();
    if (!(s > 0.0f) || !std::isfinite(s)) {
      Fail(ErrorCode::kInvariantViolation, "scale must be positive and finite");
    }
  }
  return scales;
}

void CheckScaleSet(const ScaleSet& s) {
  if (s.base_bits != 8 && s.base_bits != 16) {
    Fail(ErrorCode::kInvariantViolation, "scale base precision must be 8 or 16");
  }
  if (s.granularity.kind == GranularityKind::kPerTensor && s.scales.size() != 1) {
    Fail(ErrorCode::kInvariantViolation, "per-tensor scale set needs one scale");
  }
  for (float v : s.scales) {
    if (!(v > 0.0f) || !std::isfinite(v)) {
      Fail(ErrorCode::kInvariantViolation, "scale must be positive and finite");
    }
  }
}

void PutElements(Bytes& out, std::span<const SignMag> values, unsigned mag_bits) {
  BitWriter bits(&out);
  for (const SignMag& e : values) {
    bits.Put(e.sign, 1);
    bits.Put(e.mag, mag_bits);
  }
  bits.Finish();
}

std::vector<SignMag> GetElements(ByteReader& in, std::size_t count, unsigned mag_bits) {
  BitReader bits(in.Take(SectionBytes(count, mag_bits + 1)));
  std::vector<SignMag> values(count);
  for (SignMag& e : values) {
    e.sign = static_cast<std::uint8_t>(bits.Get(1));
    e.mag = static_cast<std::uint16_t>(bits.Get(mag_bits));
    if (e.sign && e.mag == 0) {
      Fail(ErrorCode::kInvariantViolation, "zero magnitude with sign bit set");
    }
  }
  if (!bits.PaddingIsZero()) Fail(ErrorCode::kInvariantViolation, "non-zero padding bits");
  return values;
}

}  // namespace

Bytes EncodeQrz(const CompressedTensor& tensor, const ScaleSet& scales, Role role) {
  ValidateCompressed(tensor);
  CheckScaleSet(scales);
  if (scales.base_bits != tensor.config.base_bits) {
    Fail(ErrorCode::kInvariantViolation, "scale base precision differs from tensor");
  }
  CheckScalesFor(tensor.shape, scales);
  const SdrConfig& cfg = tensor.config;
  if (cfg.group_size > std::numeric_limits<std::uint32_t>::max()) {
    Fail(ErrorCode::kInvariantViolation, "group size exceeds u32");
  }

  Bytes out;
  ByteWriter w(&out);
  w.Raw(kQrzMagic);
  w.U16(kFormatVersion);
  w.U8(static_cast<std::uint8_t>(role));
  w.U8(static_cast<std::uint8_t>(cfg.base_bits));
  w.U8(static_cast<std::uint8_t>(cfg.target_bits));
  w.U8(static_cast<std::uint8_t>(cfg.flag_bits));
  w.U32(static_cast<std::uint32_t>(cfg.group_size));
  PutScaleHeader(w, scales);
  PutShape(w, tensor.shape);
  PutScales(w, scales.scales);

  BitWriter flags(&out);
  for (std::uint8_t f : tensor.flags) flags.Put(f, cfg.flag_bits);
  flags.Finish();
  PutElements(out, tensor.elements, cfg.salient_bits());
  return out;
}

QrzContents DecodeQrz(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  ExpectMagic(in, kQrzMagic);
  ExpectVersion(in);

  QrzContents out;
  out.role = GetRole(in);
  SdrConfig& cfg = out.tensor.config;
  cfg.base_bits = in.U8();
  cfg.target_bits = in.U8();
  cfg.flag_bits = in.U8();
  cfg.group_size = in.U32();
  cfg.Validate();

  out.scales.role = out.role;
  out.scales.base_bits = cfg.base_bits;
  out.scales.granularity = GetGranularity(in);
  std::size_t count = 0;
  out.tensor.shape = GetShape(in, &count);
  out.scales.scales = GetScales(in);
  CheckScaleSet(out.scales);
  CheckScalesFor(out.tensor.shape, out.scales);

  const GroupLayout layout = out.tensor.layout();
  const std::size_t groups = layout.group_count();
  BitReader flag_bits(in.Take(SectionBytes(groups, cfg.flag_bits)));
  out.tensor.flags.resize(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const std::uint32_t f = flag_bits.Get(cfg.flag_bits);
    if (f > cfg.max_flag()) {
      Fail(ErrorCode::kFlagOutOfRange, "group " + std::to_string(g) + " flag " +
                                           std::to_string(f) + " exceeds " +
                                           std::to_string(cfg.max_flag()));
    }
    out.tensor.flags[g] = static_cast<std::uint8_t>(f);
  }
  if (!flag_bits.PaddingIsZero()) {
    Fail(ErrorCode::kInvariantViolation, "non-zero padding in flag section");
  }
  out.tensor.elements = GetElements(in, count, cfg.salient_bits());
  ExpectEnd(in);
  return out;
}

Bytes EncodeBaseTensor(const BaseTensor& tensor, const ScaleSet& scales) {
  CheckScaleSet(scales);
  if (tensor.base_bits != scales.base_bits) {
    Fail(ErrorCode::kInvariantViolation, "scale base precision differs from tensor");
  }
  if (NumElements(tensor.shape) != tensor.values.size()) {
    Fail(ErrorCode::kShapeMismatch, "tensor data length does not match its shape");
  }
  CheckScalesFor(tensor.shape, scales);
  const std::uint32_t limit = MaxMagnitude(tensor.base_bits);
  for (const SignMag& e : tensor.values) {
    if (e.mag > limit || (e.mag == 0 && e.sign)) {
      Fail(ErrorCode::kInvariantViolation, "non-canonical base integer");
    }
  }

  Bytes out;
  ByteWriter w(&out);
  w.Raw(kBaseMagic);
  w.U16(kFormatVersion);
  w.U8(static_cast<std::uint8_t>(scales.role));
  w.U8(static_cast<std::uint8_t>(tensor.base_bits));
  PutScaleHeader(w, scales);
  PutShape(w, tensor.shape);
  PutScales(w, scales.scales);
  PutElements(out, tensor.values, tensor.base_bits - 1);
  return out;
}

BaseTensorFile DecodeBaseTensor(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  ExpectMagic(in, kBaseMagic);
  ExpectVersion(in);
  BaseTensorFile out;
  out.scales.role = GetRole(in);
  out.scales.base_bits = in.U8();
  out.tensor.base_bits = out.scales.base_bits;
  out.scales.granularity = GetGranularity(in);
  std::size_t count = 0;
  out.tensor.shape = GetShape(in, &count);
  out.scales.scales = GetScales(in);
  CheckScaleSet(out.scales);
  CheckScalesFor(out.tensor.shape, out.scales);
  out.tensor.values = GetElements(in, count, out.tensor.base_bits - 1);
  const std::uint32_t limit = MaxMagnitude(out.tensor.base_bits);
  for (const SignMag& e : out.tensor.values) {
    if (e.mag > limit) Fail(ErrorCode::kInvariantViolation, "magnitude above base range");
  }
  ExpectEnd(in);
  return out;
}

Bytes EncodeScaleSet(const ScaleSet& scales) {
  CheckScaleSet(scales);
  Bytes out;
  ByteWriter w(&out);
  w.Raw(kScalesMagic);
  w.U16(kFormatVersion);
  w.U8(static_cast<std::uint8_t>(scales.role));
  w.U8(static_cast<std::uint8_t>(scales.base_bits));
  PutScaleHeader(w, scales);
  PutScales(w, scales.scales);
  return out;
}

ScaleSet DecodeScaleSet(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  ExpectMagic(in, kScalesMagic);
  ExpectVersion(in);
  ScaleSet out;
  out.role = GetRole(in);
  out.base_bits = in.U8();
  out.granularity = GetGranularity(in);
  out.scales = GetScales(in);
  CheckScaleSet(out);
  ExpectEnd(in);
  return out;
}

Bytes WriteTensorContainer(const TensorF& tensor) {
  if (NumElements(tensor.shape) != tensor.data.size()) {
    Fail(ErrorCode::kShapeMismatch, "tensor data length does not match its shape");
  }
  Bytes out;
  out.reserve(16 + 8 * tensor.shape.size() + 4 * tensor.data.size());
  ByteWriter w(&out);
  w.Raw(kTensorMagic);
  w.U16(kFormatVersion);
  w.U8(0);
  PutShape(w, tensor.shape);
  for (float v : tensor.data) {
    if (!std::isfinite(v)) Fail(ErrorCode::kUnsupportedValue, "non-finite tensor value");
    w.F32(v);
  }
  return out;
}

TensorF ReadTensorContainer(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  ExpectMagic(in, kTensorMagic);
  ExpectVersion(in);
  const std::uint8_t dtype = in.U8();
  if (dtype != 0) Fail(ErrorCode::kUnsupportedDtype, "dtype " + std::to_string(dtype));
  TensorF out;
  std::size_t count = 0;
  out.shape = GetShape(in, &count);
  if (count > in.remaining() / 4) {
    Fail(ErrorCode::kTruncatedStream, "payload shorter than 4 x element count");
  }
  out.data.resize(count);
  for (float& v : out.data) {
    v = in.F32();
    if (!std::isfinite(v)) Fail(ErrorCode::kUnsupportedValue, "NaN or Inf in payload");
  }
  ExpectEnd(in);
  return out;
}

FileKind SniffKind(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) return FileKind::kUnknown;
  const std::string_view magic(reinterpret_cast<const char*>(bytes.data()), 4);
  if (magic == kTensorMagic) return FileKind::kTensor;
  if (magic == kQrzMagic) return FileKind::kCompressed;
  if (magic == kBaseMagic) return FileKind::kBaseTensor;
  if (magic == kScalesMagic) return FileKind::kScales;
  return FileKind::kUnknown;
}

EffectiveBits ComputeEffectiveBits(unsigned target_bits, unsigned flag_bits,
                                   std::uint64_t group_size) {
  if (group_size == 0) Fail(ErrorCode::kConfigViolation, "group size must be positive");
  const std::uint64_t num = target_bits * group_size + flag_bits;
  const std::uint64_t g = std::gcd(num, group_size);
  return {num / g, group_size / g};
}

std::uint64_t PayloadBits(const CompressedTensor& tensor) {
  return static_cast<std::uint64_t>(tensor.flags.size()) * tensor.config.flag_bits +
         static_cast<std::uint64_t>(tensor.elements.size()) * tensor.config.target_bits;
}

Bytes ReadFile(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) Fail(ErrorCode::kIoError, "cannot open " + path.string());
  Bytes out((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) Fail(ErrorCode::kIoError, "read failed for " + path.string());
  return out;
}

void WriteFile(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) Fail(ErrorCode::kIoError, "cannot create " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) Fail(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace razor
