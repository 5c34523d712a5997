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

// Little-endian byte fields and MSB-first bit fields.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "razor/error.hpp"

namespace razor::detail {

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>* out) : out_(out) {}

  void Raw(std::string_view s) { out_->insert(out_->end(), s.begin(), s.end()); }
  void U8(std::uint8_t v) { out_->push_back(v); }
  void U16(std::uint16_t v) { Le(v, 2); }
  void U32(std::uint32_t v) { Le(v, 4); }
  void U64(std::uint64_t v) { Le(v, 8); }
  void F32(float v) { U32(std::bit_cast<std::uint32_t>(v)); }

 private:
  void Le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_->push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t>* out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::span<const std::uint8_t> Take(std::size_t n) {
    if (n > remaining()) {
      Fail(ErrorCode::kTruncatedStream,
           "need " + std::to_string(n) + " bytes at offset " + std::to_string(pos_) +
               ", have " + std::to_string(remaining()));
    }
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t U8() { return Take(1)[0]; }
  std::uint16_t U16() { return static_cast<std::uint16_t>(Le(2)); }
  std::uint32_t U32() { return static_cast<std::uint32_t>(Le(4)); }
  std::uint64_t U64() { return Le(8); }
  float F32() { return std::bit_cast<float>(U32()); }

  std::size_t remaining() const { return in_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  std::uint64_t Le(int n) {
    auto s = Take(n);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(s[i]) << (8 * i);
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

// Appends fields MSB-first; Finish() pads the last byte with zeros.
class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>* out) : out_(out) {}

  void Put(std::uint32_t value, unsigned width) {
    for (unsigned i = width; i-- > 0;) {
      cur_ = static_cast<std::uint8_t>((cur_ << 1) | ((value >> i) & 1u));
      if (++fill_ == 8) {
        out_->push_back(cur_);
        cur_ = 0;
        fill_ = 0;
      }
    }
  }
  void Finish() {
    if (fill_ != 0) {
      out_->push_back(static_cast<std::uint8_t>(cur_ << (8 - fill_)));
      cur_ = 0;
      fill_ = 0;
    }
  }

 private:
  std::vector<std::uint8_t>* out_;
  std::uint8_t cur_ = 0;
  unsigned fill_ = 0;
};

// Reads MSB-first fields from a section whose byte length is known up front.
class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> section) : in_(section) {}

  std::uint32_t Get(unsigned width) {
    std::uint32_t v = 0;
    for (unsigned i = 0; i < width; ++i) {
      const std::uint8_t byte = in_[bit_ >> 3];
      v = (v << 1) | ((byte >> (7 - (bit_ & 7))) & 1u);
      ++bit_;
    }
    return v;
  }
  // True when every bit after the cursor is zero.
  bool PaddingIsZero() const {
    for (std::size_t b = bit_; b < in_.size() * 8; ++b) {
      if ((in_[b >> 3] >> (7 - (b & 7))) & 1u) return false;
    }
    return true;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t bit_ = 0;
};

}  // namespace razor::detail
