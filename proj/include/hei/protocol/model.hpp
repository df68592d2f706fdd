// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "hei/fpcrt/twin.hpp"
#include "hei/matmul/matmul.hpp"
#include "hei/util/matrix.hpp"

namespace hei::protocol {

// Trained classifier plus the encryption-side parameters it expects.
// Weights stay float64 in the file; quantization happens at load so the
// scaling config can change without retraining.
//
// File layout, little-endian:
//   "PPCM" | version u16 | outputs u32 | f u64
//   | feature names: u32 count, then per name u32 len + UTF-8 bytes
//   | W: outputs x f float64 row-major | b: outputs float64
//   | s_x u32 | s_w u32 | input_int_bits u32
//   | t0 u64 | t1 u64 | n u32 | security_level u32
struct Model {
  fpcrt::TwinParams params;
  std::vector<std::string> feature_names;  // one per feature
  util::RealMat weights;                   // outputs x f
  std::vector<double> bias;                // outputs

  uint64_t f() const { return weights.cols; }
  uint32_t outputs() const { return static_cast<uint32_t>(weights.rows); }
};

inline constexpr uint16_t kModelVersion = 1;

void save_model(std::ostream& os, const Model& m);
Model load_model(std::istream& is);
void save_model_file(const std::string& path, const Model& m);
Model load_model_file(const std::string& path);

// Integer form the evaluator consumes: transposed weights at 2^s_w and
// biases at the combined scale.
struct QuantizedModel {
  util::IntMat weights;  // f x outputs
  matmul::EncodedBias bias;
};

QuantizedModel quantize_model(const Model& m);

}  // namespace hei::protocol
