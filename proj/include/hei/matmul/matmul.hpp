// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "hei/fpcrt/twin.hpp"
#include "hei/util/matrix.hpp"

namespace hei::matmul {

// Logical cost of one matrix product, measured from the backend counters.
// ciphertexts_in counts what the client uploads, ciphertexts_out what comes
// back down.
struct OpCounters {
  uint64_t mul_plain_count = 0;
  uint64_t rotation_count = 0;
  uint64_t add_count = 0;
  uint64_t ciphertexts_in = 0;
  uint64_t ciphertexts_out = 0;
};

// Closed forms for an R x f times f x C product at ring degree n. The
// rotation-based evaluator pays per (row, output) pair; the sample-batched
// baseline pays per feature.
OpCounters proposed_counts(uint64_t rows, uint64_t cols, uint64_t f,
                           uint32_t n);
OpCounters baseline_counts(uint64_t rows, uint64_t cols, uint64_t f,
                           uint32_t n);

// One input row split into ceil(f/n) slot chunks; chunk k carries features
// [k*n, (k+1)*n), zero-padded at the tail.
struct EncodedInputRow {
  std::vector<fpcrt::TwinCipher> chunks;
};

struct EncodedInputs {
  std::vector<EncodedInputRow> rows;
  uint64_t f = 0;
  uint32_t n = 0;
};

// Transposed weights: outputs[j][k] multiplies chunk k of any input row to
// weigh output j.
struct EncodedWeights {
  std::vector<std::vector<fpcrt::TwinPrepared>> outputs;
  uint64_t f = 0;
  uint32_t n = 0;
};

// Biases held as scaled integers; slot replication happens where they are
// applied, once per packed result ciphertext.
struct EncodedBias {
  std::vector<int64_t> scaled;
};

// Result entry (i, j) lives at global index g = i*cols + j, in ciphertext
// g div n at slot g mod n. Tail slots of the last ciphertext are zero.
struct PackedResult {
  std::vector<fpcrt::TwinCipher> cts;
  uint64_t rows = 0, cols = 0;
  uint32_t n = 0;
};

EncodedInputRow encode_input_row(fpcrt::TwinBackend& be,
                                 std::span<const int64_t> row);
EncodedInputs encode_inputs(fpcrt::TwinBackend& be, const util::IntMat& x);
// w is f x cols; transposition into output-major chunks happens here.
EncodedWeights encode_weights(fpcrt::TwinBackend& be, const util::IntMat& w);
EncodedBias encode_bias(std::span<const double> bias,
                        const fpcrt::ScalingConfig& cfg);

// Streaming evaluator. Rows may arrive in any order, each exactly once, and
// push_row is safe to call from several threads; only the packed accumulators
// stay resident, so batch memory does not grow with the row count. Refuses at
// construction when the product could overflow the plaintext capacity.
class MatmulStream {
 public:
  MatmulStream(fpcrt::TwinBackend& be, const EncodedWeights& w,
               const EncodedBias& b, uint64_t total_rows);

  void push_row(uint64_t row_index, const EncodedInputRow& row);
  // Adds the bias pattern and hands out the packed result. Throws if any row
  // is still missing.
  PackedResult finish();
  // Valid after finish(): backend counter delta over this stream's lifetime.
  const OpCounters& counters() const;

 private:
  const fpcrt::TwinPrepared& mask_for_slot(uint32_t slot,
                                           fpcrt::TwinPrepared& scratch);

  fpcrt::TwinBackend& be_;
  const EncodedWeights& w_;  // caller keeps the weights alive
  EncodedBias bias_;
  uint64_t rows_, cols_, f_;
  uint32_t n_;
  size_t chunks_;
  std::vector<std::optional<fpcrt::TwinCipher>> acc_;
  std::vector<bool> seen_;
  uint64_t pushed_ = 0;
  bool finished_ = false;
  bool cache_masks_;
  std::unordered_map<uint32_t, fpcrt::TwinPrepared> mask_cache_;
  std::mutex mu_;
  bfv::BackendCounters start_;
  OpCounters counters_;
};

// Whole-batch convenience wrapper over MatmulStream; rows are distributed
// over a worker pool.
PackedResult matmul(fpcrt::TwinBackend& be, const EncodedInputs& x,
                    const EncodedWeights& w, const EncodedBias& b,
                    OpCounters* counters = nullptr, unsigned threads = 0);

// Decrypt and undo the layout; entries come back as scaled signed integers.
util::IntMat unpack_results(fpcrt::TwinBackend& client, const PackedResult& y);

// Sample-batched comparator: block b, output j holds rows [b*n, b*n + n) of
// output column j, one slot per sample.
struct BaselineResult {
  std::vector<std::vector<fpcrt::TwinCipher>> blocks;
  uint64_t rows = 0, cols = 0;
  uint32_t n = 0;
};

// Standard ct-pt product: one ciphertext per feature column, weights applied
// as all-slot constants. Streams feature by feature so only the accumulators
// are resident. Encrypts internally, so `be` must hold encryption keys.
BaselineResult baseline_matmul(fpcrt::TwinBackend& be, const util::IntMat& x,
                               const util::IntMat& w, const EncodedBias& b,
                               OpCounters* counters = nullptr);
util::IntMat unpack_baseline(fpcrt::TwinBackend& client,
                             const BaselineResult& y);

}  // namespace hei::matmul
