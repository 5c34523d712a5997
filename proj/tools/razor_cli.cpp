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

// razor: command-line front end for the quantize / razor / matmul pipeline.
//
// Exit status: 0 on success, 1 on data errors, 2 on usage errors. Failures
// print one JSON object {"error": <code>, "message": <text>} on stderr.

#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "razor/analysis.hpp"
#include "razor/arith.hpp"
#include "razor/error.hpp"
#include "razor/packfmt.hpp"
#include "razor/quantizer.hpp"
#include "razor/sdr.hpp"

namespace {

using nlohmann::json;
using namespace razor;

int ReportError(std::string_view code, const std::string& message, int status) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << "\n";
  return status;
}

json Real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json ToJson(const ErrorReport& r) {
  json j{{"mse", Real(r.mse)},
         {"max_abs_err", Real(r.max_abs_err)},
         {"sqnr_db", Real(r.sqnr_db)},
         {"zero_frac_before", r.zero_frac_before},
         {"zero_frac_after", r.zero_frac_after}};
  if (r.max_flag) j["max_flag"] = *r.max_flag;
  return j;
}

json ToJson(const LeadingOneHistogram& h, unsigned threshold) {
  // counts[i] is bit order i + 1 (1-based from the LSB).
  return {{"report", "histogram"},
          {"role", RoleName(h.role)},
          {"group_size", h.group_size},
          {"base_bits", h.base_bits},
          {"groups", h.total()},
          {"zero_groups", h.zero_groups},
          {"counts", h.counts},
          {"fraction_above", {{"order", threshold}, {"value", h.FractionAbove(threshold)}}}};
}

Granularity ParseGranularity(const std::string& name, unsigned axis) {
  if (name == "per-tensor") return Granularity::PerTensor();
  return Granularity::PerChannel(static_cast<std::uint8_t>(axis));
}

Shape ParseShape(const std::string& text) {
  Shape shape;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) shape.push_back(std::stoull(part));
  return shape;
}

struct SdrOptions {
  unsigned base_bits = 16;
  unsigned target_bits = 4;
  std::size_t group_size = 16;
  std::optional<unsigned> flag_bits;

  SdrConfig Make() const {
    return SdrConfig::Make(base_bits, target_bits, group_size, flag_bits);
  }
};

// Base tensor for statistics: decoded directly, decompressed, or quantized from
// floats with a per-tensor calibration on the tensor itself.
BaseTensorFile LoadBase(const Bytes& bytes, unsigned base_bits, Role role) {
  switch (SniffKind(bytes)) {
    case FileKind::kBaseTensor:
      return DecodeBaseTensor(bytes);
    case FileKind::kCompressed: {
      QrzContents q = DecodeQrz(bytes);
      return {DecompressTensor(q.tensor), q.scales};
    }
    case FileKind::kTensor: {
      TensorF t = ReadTensorContainer(bytes);
      ScaleSet s = CalibrateAbsmax(std::span(&t, 1), role, Granularity::PerTensor(), base_bits);
      return {QuantizeBase(t, s), s};
    }
    default:
      Fail(ErrorCode::kBadMagic, "unrecognized input file");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"razor: absmax quantization, significant data razoring and "
               "decompression-free integer matmul"};
  app.require_subcommand(1);

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Compute static absmax scales");
  std::string role_name = "activation";
  std::string granularity = "per-tensor";
  unsigned axis = 0;
  unsigned cal_base = 16;
  bool fp16_scales = false;
  std::string cal_out;
  std::vector<std::string> cal_inputs;
  calibrate->add_option("--role", role_name, "weight|activation|query|key|value")
      ->check(CLI::IsMember({"weight", "activation", "query", "key", "value"}));
  calibrate->add_option("--granularity", granularity)
      ->check(CLI::IsMember({"per-tensor", "per-channel"}));
  calibrate->add_option("--axis", axis, "Channel axis for per-channel scales");
  calibrate->add_option("--base-bits", cal_base)->check(CLI::IsMember({8, 16}));
  calibrate->add_flag("--fp16-scales", fp16_scales, "Round scales to binary16");
  calibrate->add_option("--out", cal_out, "Output scale file (QRZM)")->required();
  calibrate->add_option("tensors", cal_inputs, "FTN1 calibration tensors")
      ->required();

  // quantize
  auto* quantize = app.add_subcommand("quantize", "FTN1 floats -> QBT1 base integers");
  std::string q_scales, q_in, q_out;
  quantize->add_option("--scales", q_scales)->required();
  quantize->add_option("input", q_in)->required();
  quantize->add_option("output", q_out)->required();

  // compress
  auto* compress = app.add_subcommand("compress", "QBT1 base integers -> QRZ1");
  SdrOptions c_opts;
  std::string c_in, c_out;
  compress->add_option("--base-bits", c_opts.base_bits)->check(CLI::IsMember({8, 16}));
  compress->add_option("--target-bits", c_opts.target_bits);
  compress->add_option("--group-size", c_opts.group_size);
  compress->add_option("--flag-bits", c_opts.flag_bits);
  compress->add_option("input", c_in)->required();
  compress->add_option("output", c_out)->required();

  // decompress
  auto* decompress = app.add_subcommand("decompress", "QRZ1 -> QBT1 (or FTN1)");
  bool d_float = false;
  std::string d_in, d_out;
  decompress->add_flag("--dequantize", d_float, "Write dequantized FTN1 floats");
  decompress->add_option("input", d_in)->required();
  decompress->add_option("output", d_out)->required();

  // matmul
  auto* matmul = app.add_subcommand("matmul", "lhs[M,K] x rhs[N,K]^T on compressed data");
  std::string m_lhs, m_rhs, m_out;
  matmul->add_option("lhs", m_lhs)->required();
  matmul->add_option("rhs", m_rhs)->required();
  matmul->add_option("--out", m_out)->required();

  // stats
  auto* stats = app.add_subcommand("stats", "JSON reports on stdout");
  bool s_hist = false, s_zeros = false, s_errors = false;
  SdrOptions s_opts;
  unsigned s_threshold = 12;
  unsigned s_dmq_bits = 4;
  std::string s_role = "activation", s_scales, s_in;
  stats->add_flag("--hist", s_hist, "Leading-one histogram");
  stats->add_flag("--zeros", s_zeros, "Zeroed-element fractions");
  stats->add_flag("--errors", s_errors, "Round-trip error vs DMQ and absmax baselines");
  stats->add_option("--base-bits", s_opts.base_bits)->check(CLI::IsMember({8, 16}));
  stats->add_option("--target-bits", s_opts.target_bits);
  stats->add_option("--group-size", s_opts.group_size);
  stats->add_option("--flag-bits", s_opts.flag_bits);
  stats->add_option("--threshold", s_threshold, "Order for fraction_above");
  stats->add_option("--dmq-bits", s_dmq_bits);
  stats->add_option("--role", s_role)
      ->check(CLI::IsMember({"weight", "activation", "query", "key", "value"}));
  stats->add_option("--scales", s_scales, "QRZM scales for --errors");
  stats->add_option("input", s_in)->required();

  // cost
  auto* cost = app.add_subcommand("cost", "Rotation vs SDR operation counts");
  cost->set_help_flag("--help", "Print this help message and exit");
  std::uint64_t k_m = 0, k_n = 0, k_h = 0, k_g = 0;
  cost->add_option("--m", k_m)->required();
  cost->add_option("--n", k_n)->required();
  cost->add_option("--h", k_h)->required();
  cost->add_option("--g", k_g)->required();

  // check
  auto* check = app.add_subcommand("check", "Validate a QRZ1 file");
  std::string k_in;
  check->add_option("input", k_in)->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic N(0,1) FTN1 tensor");
  std::string y_shape = "64,64", y_out;
  std::uint64_t y_seed = 0;
  double y_outliers = 0.0, y_outlier_scale = 100.0;
  synth->add_option("--shape", y_shape, "Comma-separated dims");
  synth->add_option("--seed", y_seed);
  synth->add_option("--outliers", y_outliers, "Fraction of elements scaled up");
  synth->add_option("--outlier-scale", y_outlier_scale);
  synth->add_option("--out", y_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return ReportError("Usage", e.what(), 2);
  }

  try {
    if (*calibrate) {
      Role role{};
      ParseRole(role_name, &role);
      std::vector<TensorF> samples;
      for (const auto& path : cal_inputs) samples.push_back(ReadTensorContainer(ReadFile(path)));
      ScaleSet s = CalibrateAbsmax(samples, role, ParseGranularity(granularity, axis), cal_base);
      if (fp16_scales) s = WithHalfPrecisionScales(std::move(s));
      WriteFile(cal_out, EncodeScaleSet(s));
      std::cout << json{{"scales", s.scales.size()}, {"role", RoleName(s.role)},
                        {"base_bits", s.base_bits}}.dump()
                << "\n";
    } else if (*quantize) {
      const ScaleSet s = DecodeScaleSet(ReadFile(q_scales));
      const TensorF t = ReadTensorContainer(ReadFile(q_in));
      WriteFile(q_out, EncodeBaseTensor(QuantizeBase(t, s), s));
    } else if (*compress) {
      const BaseTensorFile in = DecodeBaseTensor(ReadFile(c_in));
      if (in.tensor.base_bits != c_opts.base_bits) {
        Fail(ErrorCode::kConfigViolation,
             "input has base precision " + std::to_string(in.tensor.base_bits) +
                 " but --base-bits is " + std::to_string(c_opts.base_bits));
      }
      const CompressedTensor ct = CompressTensor(in.tensor, c_opts.Make());
      WriteFile(c_out, EncodeQrz(ct, in.scales, in.scales.role));
    } else if (*decompress) {
      const QrzContents q = DecodeQrz(ReadFile(d_in));
      const BaseTensor base = DecompressTensor(q.tensor);
      WriteFile(d_out, d_float ? WriteTensorContainer(DequantizeBase(base, q.scales))
                               : EncodeBaseTensor(base, q.scales));
    } else if (*matmul) {
      const QrzContents lhs = DecodeQrz(ReadFile(m_lhs));
      const QrzContents rhs = DecodeQrz(ReadFile(m_rhs));
      const TensorF out =
          MatmulCompressed({lhs.tensor, rhs.tensor, lhs.scales, rhs.scales});
      WriteFile(m_out, WriteTensorContainer(out));
      std::cout << json{{"shape", out.shape}}.dump() << "\n";
    } else if (*stats) {
      const Bytes bytes = ReadFile(s_in);
      Role role{};
      ParseRole(s_role, &role);
      if (!s_hist && !s_zeros && !s_errors) {
        s_hist = s_zeros = true;
        s_errors = SniffKind(bytes) == FileKind::kTensor;
      }
      const SdrConfig cfg = s_opts.Make();
      if (s_hist || s_zeros) {
        const BaseTensorFile base = LoadBase(bytes, s_opts.base_bits, role);
        if (s_hist) {
          std::cout << ToJson(ComputeLeadingOneHistogram(base.tensor, cfg.group_size,
                                                         base.scales.role),
                              s_threshold)
                           .dump()
                    << "\n";
        }
        if (s_zeros) {
          SdrConfig zcfg = cfg;
          if (zcfg.base_bits != base.tensor.base_bits) {
            zcfg = SdrConfig::Make(base.tensor.base_bits, cfg.target_bits, cfg.group_size);
          }
          const BaseTensor recon = DecompressTensor(CompressTensor(base.tensor, zcfg));
          const auto zeros = [](const std::vector<SignMag>& v) {
            std::uint64_t z = 0;
            for (const SignMag& e : v) z += e.mag == 0;
            return v.empty() ? 0.0 : static_cast<double>(z) / static_cast<double>(v.size());
          };
          std::cout << json{{"report", "zeros"},
                            {"role", RoleName(base.scales.role)},
                            {"elements", base.tensor.values.size()},
                            {"zero_frac_before", zeros(base.tensor.values)},
                            {"zero_frac_after", zeros(recon.values)}}
                           .dump()
                    << "\n";
        }
      }
      if (s_errors) {
        if (SniffKind(bytes) != FileKind::kTensor) {
          Fail(ErrorCode::kUnsupportedDtype, "--errors needs an FTN1 float tensor");
        }
        const TensorF t = ReadTensorContainer(bytes);
        const ScaleSet scales =
            s_scales.empty()
                ? CalibrateAbsmax(std::span(&t, 1), role, Granularity::PerTensor(), cfg.base_bits)
                : DecodeScaleSet(ReadFile(s_scales));
        std::cout << json{{"report", "errors"},
                          {"sdr", ToJson(CompressionErrorReport(t, scales, cfg))},
                          {"dmq", ToJson(DmqBaseline(t, cfg.group_size, s_dmq_bits))},
                          {"absmax_per_tensor", ToJson(AbsmaxBaseline(t, s_dmq_bits))}}
                         .dump()
                  << "\n";
      }
    } else if (*cost) {
      const CostReport c = OpsCost(k_m, k_n, k_h, k_g);
      std::cout << json{{"report", "cost"},
                        {"hadamard_single_flops", c.hadamard_single_flops},
                        {"hadamard_heads_flops", c.hadamard_heads_flops},
                        {"sdr_compression_iops", c.sdr_compression_iops},
                        {"barrel_shifter_iops", c.barrel_shifter_iops},
                        {"exact", c.exact},
                        {"extension_sdr_per_element_iops", c.sdr_per_element_iops}}
                       .dump()
                << "\n";
    } else if (*check) {
      const QrzContents q = DecodeQrz(ReadFile(k_in));
      ValidateCanonicalFlags(q.tensor);
      const SdrConfig& cfg = q.tensor.config;
      const EffectiveBits eff =
          ComputeEffectiveBits(cfg.target_bits, cfg.flag_bits, cfg.group_size);
      std::cout << json{{"status", "ok"},
                        {"role", RoleName(q.role)},
                        {"shape", q.tensor.shape},
                        {"groups", q.tensor.flags.size()},
                        {"elements", q.tensor.elements.size()},
                        {"effective_bits", eff.value()},
                        {"payload_bits", PayloadBits(q.tensor)}}
                       .dump()
                << "\n";
    } else if (*synth) {
      WriteFile(y_out, WriteTensorContainer(
                           SyntheticNormal(ParseShape(y_shape), y_seed, y_outliers,
                                           y_outlier_scale)));
    }
  } catch (const Error& e) {
    return ReportError(ErrorName(e.code()), e.what(), 1);
  } catch (const std::exception& e) {
    return ReportError("Internal", e.what(), 1);
  }
  return 0;
}
