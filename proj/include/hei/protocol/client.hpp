// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "hei/fpcrt/twin.hpp"
#include "hei/protocol/wire.hpp"
#include "hei/util/matrix.hpp"

namespace hei::protocol {

// Rotation keys for both branches plus the public encryption parameters the
// server must validate against its model.
SessionInitPayload make_session_init(const fpcrt::TwinContext& ctx,
                                     const fpcrt::TwinKeys& keys);

// Scale real-valued features, split them across the modulus pair, encrypt,
// and serialize. Inputs must lie in [0, 2^input_int_bits); a violation names
// the offending row and column.
InferRequestPayload client_prepare(const fpcrt::TwinContext& ctx,
                                   fpcrt::TwinBackend& be,
                                   const util::RealMat& features,
                                   uint64_t session_id);

struct InferenceResult {
  std::vector<uint32_t> labels;
  util::RealMat scores;  // descaled to real values
  util::IntMat raw;      // scaled integers exactly as decrypted
};

// Decrypt the packed response, recombine, descale, and pick each row's
// highest score. Ties go to the lowest class index.
InferenceResult client_finalize(const fpcrt::TwinContext& ctx,
                                fpcrt::TwinBackend& be,
                                const InferResponsePayload& resp);

size_t argmax_lowest(std::span<const double> scores);

}  // namespace hei::protocol
