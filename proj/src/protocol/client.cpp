// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/protocol/client.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "hei/bfv/serialize.hpp"
#include "hei/fpcrt/fixed_point.hpp"
#include "hei/matmul/matmul.hpp"
#include "hei/util/errors.hpp"

namespace hei::protocol {

namespace {

std::string cipher_bytes(const bfv::HeCipher& ct, const bfv::BfvContext& ctx) {
  return bfv::to_bytes(std::get<bfv::Ciphertext>(ct.v), ctx,
                       [](std::ostream& os, const bfv::Ciphertext& c,
                          const bfv::BfvContext& cx) {
                         bfv::save_ciphertext(os, c, cx);
                       });
}

bfv::HeCipher cipher_from_bytes(const std::string& bytes,
                                const bfv::BfvContext& ctx) {
  std::istringstream is(bytes, std::ios::binary);
  return bfv::HeCipher{bfv::load_ciphertext(is, ctx)};
}

}  // namespace

SessionInitPayload make_session_init(const fpcrt::TwinContext& ctx,
                                     const fpcrt::TwinKeys& keys) {
  if (keys.gks.size() != ctx.branches())
    throw ParamError("session init: one galois key set per branch required");
  SessionInitPayload p;
  p.n = ctx.params().n;
  p.t0 = ctx.params().t.t0;
  p.t1 = ctx.params().t.t1;
  p.s_x = ctx.params().scaling.s_x;
  for (size_t b = 0; b < ctx.branches(); ++b)
    p.galois_blobs.push_back(bfv::to_bytes(
        keys.gks[b], *ctx.branch(b),
        [](std::ostream& os, const bfv::GaloisKeySet& gk,
           const bfv::BfvContext& cx) { bfv::save_galois_keys(os, gk, cx); }));
  return p;
}

InferRequestPayload client_prepare(const fpcrt::TwinContext& ctx,
                                   fpcrt::TwinBackend& be,
                                   const util::RealMat& features,
                                   uint64_t session_id) {
  if (features.rows == 0 || features.cols == 0)
    throw ParamError("client_prepare: empty feature matrix");
  const auto& cfg = be.params().scaling;
  const double limit = std::ldexp(1.0, static_cast<int>(cfg.input_int_bits));

  InferRequestPayload req;
  req.session_id = session_id;
  req.rows = features.rows;
  req.f = features.cols;

  std::vector<int64_t> scaled(features.cols);
  for (size_t i = 0; i < features.rows; ++i) {
    for (size_t j = 0; j < features.cols; ++j) {
      double x = features(i, j);
      if (!(x >= 0.0 && x < limit))
        throw RangeError("client_prepare: feature out of range at row " +
                         std::to_string(i) + " column " + std::to_string(j));
      scaled[j] = fpcrt::scale_value(x, cfg.s_x);
    }
    auto row = matmul::encode_input_row(be, scaled);
    for (const auto& chunk : row.chunks)
      for (size_t b = 0; b < chunk.b.size(); ++b)
        req.ct_blobs.push_back(cipher_bytes(chunk.b[b], *ctx.branch(b)));
  }
  return req;
}

InferenceResult client_finalize(const fpcrt::TwinContext& ctx,
                                fpcrt::TwinBackend& be,
                                const InferResponsePayload& resp) {
  if (resp.rows == 0 || resp.outputs == 0)
    throw CodecError("client_finalize: empty response");
  if (resp.rows > (uint64_t{1} << 40) / resp.outputs)
    throw CodecError("client_finalize: implausible response shape");
  const uint32_t n = ctx.params().n;
  const size_t branches = ctx.branches();
  uint64_t packed =
      (resp.rows * resp.outputs + n - 1) / n;
  if (resp.ct_blobs.size() != packed * branches)
    throw CodecError("client_finalize: ciphertext count does not match shape");

  matmul::PackedResult y;
  y.rows = resp.rows;
  y.cols = resp.outputs;
  y.n = n;
  for (uint64_t c = 0; c < packed; ++c) {
    fpcrt::TwinCipher ct;
    for (size_t b = 0; b < branches; ++b)
      ct.b.push_back(
          cipher_from_bytes(resp.ct_blobs[c * branches + b], *ctx.branch(b)));
    y.cts.push_back(std::move(ct));
  }

  InferenceResult out;
  out.raw = matmul::unpack_results(be, y);
  fpcrt::ScalingConfig echo;
  echo.s_x = resp.s_x;
  echo.s_w = resp.s_w;
  out.scores = util::RealMat(resp.rows, resp.outputs);
  out.labels.resize(resp.rows);
  std::vector<double> row(resp.outputs);
  for (size_t i = 0; i < resp.rows; ++i) {
    for (size_t j = 0; j < resp.outputs; ++j) {
      row[j] = fpcrt::descale_output(out.raw(i, j), echo);
      out.scores(i, j) = row[j];
    }
    out.labels[i] = static_cast<uint32_t>(argmax_lowest(row));
  }
  return out;
}

size_t argmax_lowest(std::span<const double> scores) {
  if (scores.empty()) throw ParamError("argmax of an empty score vector");
  size_t best = 0;
  for (size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

}  // namespace hei::protocol
