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

#include <stdexcept>
#include <string>
#include <string_view>

namespace razor {

// Stable identifiers; the CLI prints them verbatim on stderr.
enum class ErrorCode {
  kEmptyCalibration,
  kAllZeroSlot,
  kShapeMismatch,
  kConfigViolation,
  kCorruptFlag,
  kLengthMismatch,
  kShiftOverflow,
  kPlanInvalid,
  kInvariantViolation,
  kBadMagic,
  kBadVersion,
  kTruncatedStream,
  kFlagOutOfRange,
  kUnsupportedDtype,
  kUnsupportedValue,
  kIoError,
};

constexpr std::string_view ErrorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyCalibration: return "EmptyCalibration";
    case ErrorCode::kAllZeroSlot: return "AllZeroSlot";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kConfigViolation: return "ConfigViolation";
    case ErrorCode::kCorruptFlag: return "CorruptFlag";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kShiftOverflow: return "ShiftOverflow";
    case ErrorCode::kPlanInvalid: return "PlanInvalid";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kBadVersion: return "BadVersion";
    case ErrorCode::kTruncatedStream: return "TruncatedStream";
    case ErrorCode::kFlagOutOfRange: return "FlagOutOfRange";
    case ErrorCode::kUnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::kUnsupportedValue: return "UnsupportedValue";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace razor
