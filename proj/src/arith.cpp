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

#include "razor/arith.hpp"

#include <bit>
#include <string>

#include "razor/error.hpp"

namespace razor {
namespace {

constexpr std::int64_t kAccLimit = std::int64_t{1} << 62;

unsigned CeilLog2(std::size_t n) {
  return n <= 1 ? 0u : static_cast<unsigned>(std::bit_width(n - 1));
}

void CheckPair(GroupView a, const SdrConfig& a_cfg, GroupView b, const SdrConfig& b_cfg) {
  if (a.elements.size() != b.elements.size()) {
    Fail(ErrorCode::kLengthMismatch, "group lengths differ: " +
                                         std::to_string(a.elements.size()) + " vs " +
                                         std::to_string(b.elements.size()));
  }
  if (a.flag > a_cfg.max_flag() || b.flag > b_cfg.max_flag()) {
    Fail(ErrorCode::kCorruptFlag, "group flag exceeds its configuration bound");
  }
  const unsigned headroom =
      a_cfg.salient_bits() + b_cfg.salient_bits() + CeilLog2(a.elements.size());
  if (headroom > 62 || a.flag + b.flag > 62 - headroom) {
    Fail(ErrorCode::kShiftOverflow, "flag sum " + std::to_string(a.flag + b.flag) +
                                        " overflows the 64-bit accumulator");
  }
}

// Sum of signed salient products; no shift.
std::int64_t DotSalient(std::span<const SignMag> a, std::span<const SignMag> b) {
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::int64_t p = static_cast<std::int64_t>(a[i].mag) * b[i].mag;
    sum += (a[i].sign ^ b[i].sign) ? -p : p;
  }
  return sum;
}

std::size_t ScaleStride(const ScaleSet& s, const char* which) {
  if (s.granularity.kind == GranularityKind::kPerTensor) return 0;
  if (s.granularity.axis != 0) {
    Fail(ErrorCode::kPlanInvalid,
         std::string(which) + " scales must be per-tensor or per-channel along axis 0");
  }
  return 1;
}

}  // namespace

void GroupProductAcc::Add(std::int64_t group_product, unsigned shift) {
  std::int64_t next = 0;
  if (__builtin_add_overflow(acc, group_product, &next) || next >= kAccLimit ||
      next <= -kAccLimit) {
    Fail(ErrorCode::kShiftOverflow, "accumulator exceeds 2^62");
  }
  acc = next;
  if (shift > max_shift) max_shift = shift;
}

unsigned MaxPairShift(const SdrConfig& a, const SdrConfig& b) {
  return a.max_flag() + b.max_flag();
}

std::int64_t MacGroup(GroupView a, const SdrConfig& a_cfg, GroupView b,
                      const SdrConfig& b_cfg) {
  CheckPair(a, a_cfg, b, b_cfg);
  const std::int64_t sum = DotSalient(a.elements, b.elements);
  return sum * (std::int64_t{1} << (a.flag + b.flag));
}

std::int64_t MacGroupDecompressOracle(GroupView a, const SdrConfig& a_cfg, GroupView b,
                                      const SdrConfig& b_cfg) {
  CheckPair(a, a_cfg, b, b_cfg);
  const std::vector<SignMag> da = DecompressGroup(a, a_cfg);
  const std::vector<SignMag> db = DecompressGroup(b, b_cfg);
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < da.size(); ++i) sum += da[i].value() * db[i].value();
  return sum;
}

void ValidatePlan(const MatmulPlan& plan) {
  const CompressedTensor& l = plan.lhs;
  const CompressedTensor& r = plan.rhs;
  if (l.shape.size() != 2 || r.shape.size() != 2) {
    Fail(ErrorCode::kPlanInvalid, "matmul operands must be rank 2");
  }
  if (l.shape[1] != r.shape[1]) {
    Fail(ErrorCode::kPlanInvalid, "inner dimensions differ: " + std::to_string(l.shape[1]) +
                                      " vs " + std::to_string(r.shape[1]));
  }
  if (l.config.group_size != r.config.group_size) {
    Fail(ErrorCode::kPlanInvalid, "group sizes differ");
  }
  if (plan.lhs_scales.base_bits != l.config.base_bits ||
      plan.rhs_scales.base_bits != r.config.base_bits) {
    Fail(ErrorCode::kPlanInvalid, "scale base precision does not match operand");
  }
  for (const auto* s : {&plan.lhs_scales, &plan.rhs_scales}) {
    ScaleStride(*s, s == &plan.lhs_scales ? "lhs" : "rhs");
  }
  if (plan.lhs_scales.scales.size() !=
      (plan.lhs_scales.granularity.kind == GranularityKind::kPerTensor ? 1 : l.shape[0])) {
    Fail(ErrorCode::kPlanInvalid, "lhs scale count does not match its rows");
  }
  if (plan.rhs_scales.scales.size() !=
      (plan.rhs_scales.granularity.kind == GranularityKind::kPerTensor ? 1 : r.shape[0])) {
    Fail(ErrorCode::kPlanInvalid, "rhs scale count does not match its rows");
  }
  ValidateCompressed(l);
  ValidateCompressed(r);
}

std::vector<std::int64_t> MatmulCompressedInt(const CompressedTensor& lhs,
                                              const CompressedTensor& rhs) {
  const GroupLayout ll = lhs.layout();
  const GroupLayout rl = rhs.layout();
  const std::size_t m_rows = ll.rows();
  const std::size_t n_rows = rl.rows();
  const std::size_t gpr = ll.groups_per_row();
  std::vector<std::int64_t> out(m_rows * n_rows, 0);

  const auto cells = static_cast<std::ptrdiff_t>(m_rows * n_rows);
  bool ok = true;
#pragma omp parallel for schedule(static) reduction(&& : ok)
  for (std::ptrdiff_t cell = 0; cell < cells; ++cell) {
    const std::size_t m = cell / n_rows;
    const std::size_t n = cell % n_rows;
    GroupProductAcc acc;
    try {
      for (std::size_t j = 0; j < gpr; ++j) {
        const GroupView a = lhs.group(ll, m * gpr + j);
        const GroupView b = rhs.group(rl, n * gpr + j);
        acc.Add(MacGroup(a, lhs.config, b, rhs.config), a.flag + b.flag);
      }
    } catch (const Error&) {
      ok = false;
      continue;
    }
    out[cell] = acc.acc;
  }
  if (!ok) Fail(ErrorCode::kShiftOverflow, "matmul accumulator overflow");
  return out;
}

std::vector<std::int64_t> MatmulReferenceInt(const CompressedTensor& lhs,
                                             const CompressedTensor& rhs) {
  const BaseTensor a = DecompressTensor(lhs);
  const BaseTensor b = DecompressTensor(rhs);
  const std::size_t m_rows = a.shape[0];
  const std::size_t n_rows = b.shape[0];
  const std::size_t k = a.shape[1];
  std::vector<std::int64_t> out(m_rows * n_rows, 0);
  for (std::size_t m = 0; m < m_rows; ++m) {
    for (std::size_t n = 0; n < n_rows; ++n) {
      std::int64_t sum = 0;
      for (std::size_t i = 0; i < k; ++i) {
        sum += a.values[m * k + i].value() * b.values[n * k + i].value();
      }
      out[m * n_rows + n] = sum;
    }
  }
  return out;
}

TensorF MatmulCompressed(const MatmulPlan& plan) {
  ValidatePlan(plan);
  const std::vector<std::int64_t> acc = MatmulCompressedInt(plan.lhs, plan.rhs);
  const std::size_t m_rows = plan.lhs.shape[0];
  const std::size_t n_rows = plan.rhs.shape[0];
  const std::size_t ls = ScaleStride(plan.lhs_scales, "lhs");
  const std::size_t rs = ScaleStride(plan.rhs_scales, "rhs");

  TensorF out{{m_rows, n_rows}, std::vector<float>(m_rows * n_rows)};
  for (std::size_t m = 0; m < m_rows; ++m) {
    const double sl = plan.lhs_scales.scales[m * ls];
    for (std::size_t n = 0; n < n_rows; ++n) {
      const double sr = plan.rhs_scales.scales[n * rs];
      out.data[m * n_rows + n] =
          static_cast<float>(static_cast<double>(acc[m * n_rows + n]) * sl * sr);
    }
  }
  return out;
}

}  // namespace razor
