// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/protocol/model.hpp"

#include <fstream>
#include <string>

#include "hei/fpcrt/fixed_point.hpp"
#include "hei/util/errors.hpp"
#include "hei/util/io.hpp"

namespace hei::protocol {

using util::read_le;
using util::write_le;

namespace {
constexpr char kMagic[4] = {'P', 'P', 'C', 'M'};
}

void save_model(std::ostream& os, const Model& m) {
  if (m.weights.rows == 0 || m.weights.cols == 0)
    throw ParamError("save_model: empty weight matrix");
  if (m.bias.size() != m.weights.rows)
    throw ParamError("save_model: bias length does not match outputs");
  if (m.feature_names.size() != m.weights.cols)
    throw ParamError("save_model: one feature name per feature required");
  util::write_bytes(os, kMagic, 4);
  write_le<uint16_t>(os, kModelVersion);
  write_le<uint32_t>(os, m.outputs());
  write_le<uint64_t>(os, m.f());
  write_le<uint32_t>(os, static_cast<uint32_t>(m.feature_names.size()));
  for (const auto& name : m.feature_names) util::write_string(os, name);
  for (double w : m.weights.a) write_le<double>(os, w);
  for (double b : m.bias) write_le<double>(os, b);
  const auto& p = m.params;
  write_le<uint32_t>(os, p.scaling.s_x);
  write_le<uint32_t>(os, p.scaling.s_w);
  write_le<uint32_t>(os, p.scaling.input_int_bits);
  write_le<uint64_t>(os, p.t.t0);
  write_le<uint64_t>(os, p.t.t1);
  write_le<uint32_t>(os, p.n);
  write_le<uint32_t>(os, static_cast<uint32_t>(p.security_level));
}

Model load_model(std::istream& is) {
  char magic[4];
  util::read_bytes(is, magic, 4);
  if (std::string_view(magic, 4) != std::string_view(kMagic, 4))
    throw CodecError("load_model: bad magic");
  uint16_t ver = read_le<uint16_t>(is);
  if (ver != kModelVersion)
    throw CodecError("load_model: unsupported version " + std::to_string(ver));
  Model m;
  uint32_t outputs = read_le<uint32_t>(is);
  uint64_t f = read_le<uint64_t>(is);
  if (outputs == 0 || f == 0) throw CodecError("load_model: empty model");
  uint32_t names = read_le<uint32_t>(is);
  if (names != f)
    throw CodecError("load_model: feature name count does not match f");
  m.feature_names.reserve(names);
  for (uint32_t i = 0; i < names; ++i)
    m.feature_names.push_back(util::read_string(is));
  m.weights = util::RealMat(outputs, static_cast<size_t>(f));
  for (double& w : m.weights.a) w = read_le<double>(is);
  m.bias.resize(outputs);
  for (double& b : m.bias) b = read_le<double>(is);
  m.params.scaling.s_x = read_le<uint32_t>(is);
  m.params.scaling.s_w = read_le<uint32_t>(is);
  m.params.scaling.input_int_bits = read_le<uint32_t>(is);
  m.params.t.t0 = read_le<uint64_t>(is);
  m.params.t.t1 = read_le<uint64_t>(is);
  m.params.n = read_le<uint32_t>(is);
  m.params.security_level = static_cast<int>(read_le<uint32_t>(is));

  uint64_t moduli[2] = {m.params.t.t0, m.params.t.t1};
  auto rep = fpcrt::capacity_check(f, m.params.scaling, moduli);
  if (!rep.ok)
    throw RangeError("load_model: " + std::to_string(f) +
                     " features need " + std::to_string(rep.required_bits) +
                     " result bits, plaintext capacity is " +
                     std::to_string(rep.capacity_bits));
  return m;
}

void save_model_file(const std::string& path, const Model& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CodecError("cannot open " + path + " for writing");
  save_model(os, m);
}

Model load_model_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CodecError("cannot open " + path);
  return load_model(is);
}

QuantizedModel quantize_model(const Model& m) {
  QuantizedModel q;
  q.weights = util::IntMat(m.f(), m.outputs());
  for (size_t j = 0; j < m.outputs(); ++j)
    for (size_t k = 0; k < m.f(); ++k)
      q.weights(k, j) = fpcrt::scale_value(m.weights(j, k), m.params.scaling.s_w);
  q.bias = matmul::encode_bias(m.bias, m.params.scaling);
  return q;
}

}  // namespace hei::protocol
