// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/matmul/matmul.hpp"

#include <bit>
#include <string>

#include "hei/util/errors.hpp"
#include "hei/util/parallel.hpp"

namespace hei::matmul {

using fpcrt::TwinCipher;
using fpcrt::TwinPrepared;
using util::IntMat;

namespace {

uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

uint32_t log2_exact(uint32_t n) {
  if (n == 0 || !std::has_single_bit(n))
    throw ParamError("ring degree must be a power of two");
  return static_cast<uint32_t>(std::countr_zero(n));
}

}  // namespace

OpCounters proposed_counts(uint64_t rows, uint64_t cols, uint64_t f,
                           uint32_t n) {
  if (rows == 0 || cols == 0 || f == 0) throw ParamError("empty shape");
  uint64_t k = ceil_div(f, n);
  uint64_t lg = log2_exact(n);
  OpCounters c;
  c.mul_plain_count = rows * cols * (k + 1);  // k chunk products + the mask
  c.rotation_count = rows * cols * lg;
  // (k-1) chunk merges + lg fold adds + 1 compression-or-bias add per pair.
  c.add_count = rows * cols * (k + lg);
  c.ciphertexts_in = rows * k;
  c.ciphertexts_out = ceil_div(rows * cols, n);
  return c;
}

OpCounters baseline_counts(uint64_t rows, uint64_t cols, uint64_t f,
                           uint32_t n) {
  if (rows == 0 || cols == 0 || f == 0) throw ParamError("empty shape");
  log2_exact(n);
  uint64_t blocks = ceil_div(rows, n);
  OpCounters c;
  c.mul_plain_count = blocks * f * cols;
  c.rotation_count = 0;
  c.add_count = blocks * cols * f;  // f-1 merges + 1 bias add per output
  c.ciphertexts_in = blocks * f;
  c.ciphertexts_out = blocks * cols;
  return c;
}

EncodedInputRow encode_input_row(fpcrt::TwinBackend& be,
                                 std::span<const int64_t> row) {
  if (row.empty()) throw ParamError("encode_input_row: empty row");
  const uint32_t n = be.slot_count();
  EncodedInputRow out;
  for (size_t k = 0; k * n < row.size(); ++k) {
    size_t len = std::min<size_t>(n, row.size() - k * n);
    out.chunks.push_back(be.encrypt(be.encode_signed(row.subspan(k * n, len))));
  }
  return out;
}

EncodedInputs encode_inputs(fpcrt::TwinBackend& be, const IntMat& x) {
  if (x.rows == 0 || x.cols == 0) throw ParamError("encode_inputs: empty matrix");
  EncodedInputs out;
  out.f = x.cols;
  out.n = be.slot_count();
  out.rows.reserve(x.rows);
  for (size_t i = 0; i < x.rows; ++i)
    out.rows.push_back(encode_input_row(
        be, std::span<const int64_t>(&x(i, 0), x.cols)));
  return out;
}

EncodedWeights encode_weights(fpcrt::TwinBackend& be, const IntMat& w) {
  if (w.rows == 0 || w.cols == 0)
    throw ParamError("encode_weights: empty matrix");
  const uint32_t n = be.slot_count();
  const uint64_t f = w.rows;
  const uint64_t k = ceil_div(f, n);
  EncodedWeights out;
  out.f = f;
  out.n = n;
  out.outputs.resize(w.cols);
  std::vector<int64_t> slots;
  for (size_t j = 0; j < w.cols; ++j) {
    out.outputs[j].reserve(k);
    for (uint64_t c = 0; c < k; ++c) {
      size_t len = std::min<uint64_t>(n, f - c * n);
      slots.assign(len, 0);
      for (size_t s = 0; s < len; ++s) slots[s] = w(c * n + s, j);
      out.outputs[j].push_back(be.prepare(be.encode_signed(slots)));
    }
  }
  return out;
}

EncodedBias encode_bias(std::span<const double> bias,
                        const fpcrt::ScalingConfig& cfg) {
  EncodedBias out;
  out.scaled.reserve(bias.size());
  for (double b : bias) out.scaled.push_back(fpcrt::scale_value(b, cfg.output_scale()));
  return out;
}

MatmulStream::MatmulStream(fpcrt::TwinBackend& be, const EncodedWeights& w,
                           const EncodedBias& b, uint64_t total_rows)
    : be_(be), w_(w), bias_(b), rows_(total_rows), f_(w.f), n_(w.n) {
  if (total_rows == 0) throw ParamError("matmul: empty input");
  cols_ = w.outputs.size();
  if (cols_ == 0 || f_ == 0) throw ParamError("matmul: empty weights");
  if (n_ != be.slot_count())
    throw ParamError("matmul: weights encoded for a different ring degree");
  chunks_ = static_cast<size_t>(ceil_div(f_, n_));
  for (const auto& row : w.outputs)
    if (row.size() != chunks_)
      throw ParamError("matmul: ragged weight encoding");
  if (bias_.scaled.size() != cols_)
    throw ParamError("matmul: bias length does not match output count");

  const auto& tp = be.params().t;
  uint64_t moduli[2] = {tp.t0, tp.t1};
  auto rep = fpcrt::capacity_check(f_, be.params().scaling, moduli);
  if (!rep.ok)
    throw RangeError("matmul: product needs " +
                     std::to_string(rep.required_bits) +
                     " result bits, capacity is " +
                     std::to_string(rep.capacity_bits) + "; refusing");

  // Mask reuse only happens when rows*cols exceeds n, and the cache can hold
  // up to n prepared plaintexts, so keep it to the sizes where that is cheap.
  cache_masks_ = n_ <= 4096;
  seen_.assign(rows_, false);
  acc_.resize(ceil_div(rows_ * cols_, n_));
  start_ = be.counters();
}

const TwinPrepared& MatmulStream::mask_for_slot(uint32_t slot,
                                                TwinPrepared& scratch) {
  if (cache_masks_) {
    std::lock_guard lk(mu_);
    auto it = mask_cache_.find(slot);
    if (it != mask_cache_.end()) return it->second;
  }
  std::vector<int64_t> onehot(n_, 0);
  onehot[slot] = 1;
  TwinPrepared m = be_.prepare(be_.encode_signed(onehot));
  if (cache_masks_) {
    std::lock_guard lk(mu_);
    auto [it, inserted] = mask_cache_.try_emplace(slot, std::move(m));
    return it->second;
  }
  scratch = std::move(m);
  return scratch;
}

void MatmulStream::push_row(uint64_t row_index, const EncodedInputRow& row) {
  if (row.chunks.size() != chunks_)
    throw ParamError("push_row: row has the wrong chunk count");
  {
    std::lock_guard lk(mu_);
    if (finished_) throw ParamError("push_row: stream already finished");
    if (row_index >= rows_) throw ParamError("push_row: row index out of range");
    if (seen_[row_index]) throw ParamError("push_row: row pushed twice");
    seen_[row_index] = true;
    ++pushed_;
  }
  for (uint64_t j = 0; j < cols_; ++j) {
    std::vector<TwinCipher> prods;
    prods.reserve(chunks_);
    for (size_t k = 0; k < chunks_; ++k) {
      TwinCipher p = row.chunks[k];
      be_.mul_plain_inplace(p, w_.outputs[j][k]);
      prods.push_back(std::move(p));
    }
    TwinCipher dot = be_.add_many(prods);
    dot = be_.sum_all_slots(dot);

    uint64_t g = row_index * cols_ + j;
    TwinPrepared scratch;
    be_.mul_plain_inplace(dot, mask_for_slot(static_cast<uint32_t>(g % n_),
                                             scratch));
    size_t c = static_cast<size_t>(g / n_);
    std::lock_guard lk(mu_);
    if (acc_[c])
      be_.add_inplace(*acc_[c], dot);
    else
      acc_[c] = std::move(dot);
  }
}

PackedResult MatmulStream::finish() {
  std::lock_guard lk(mu_);
  if (finished_) throw ParamError("finish: already finished");
  if (pushed_ != rows_)
    throw ParamError("finish: " + std::to_string(rows_ - pushed_) +
                     " rows were never pushed");
  PackedResult out;
  out.rows = rows_;
  out.cols = cols_;
  out.n = n_;
  out.cts.reserve(acc_.size());
  std::vector<int64_t> pattern(n_);
  for (size_t c = 0; c < acc_.size(); ++c) {
    // Slot s of packed ciphertext c is global index c*n + s; give every
    // occupied slot its output's bias and leave the tail at zero.
    for (uint32_t s = 0; s < n_; ++s) {
      uint64_t g = static_cast<uint64_t>(c) * n_ + s;
      pattern[s] = g < rows_ * cols_ ? bias_.scaled[g % cols_] : 0;
    }
    TwinCipher ct = std::move(*acc_[c]);
    be_.add_plain_inplace(ct, be_.encode_signed(pattern));
    out.cts.push_back(std::move(ct));
  }
  acc_.clear();
  auto end = be_.counters();
  counters_.mul_plain_count = end.mul_plain - start_.mul_plain;
  counters_.rotation_count = end.rotation - start_.rotation;
  counters_.add_count = end.add - start_.add;
  counters_.ciphertexts_in = rows_ * chunks_;
  counters_.ciphertexts_out = out.cts.size();
  finished_ = true;
  return out;
}

const OpCounters& MatmulStream::counters() const {
  if (!finished_) throw ParamError("counters: stream not finished");
  return counters_;
}

PackedResult matmul(fpcrt::TwinBackend& be, const EncodedInputs& x,
                    const EncodedWeights& w, const EncodedBias& b,
                    OpCounters* counters, unsigned threads) {
  if (x.rows.empty()) throw ParamError("matmul: empty input");
  if (x.f != w.f || x.n != w.n)
    throw ParamError("matmul: input and weight shapes do not match");
  MatmulStream stream(be, w, b, x.rows.size());
  util::parallel_for(
      x.rows.size(),
      [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i) stream.push_row(i, x.rows[i]);
      },
      threads);
  PackedResult out = stream.finish();
  if (counters) *counters = stream.counters();
  return out;
}

IntMat unpack_results(fpcrt::TwinBackend& client, const PackedResult& y) {
  if (y.rows == 0 || y.cols == 0) throw ParamError("unpack: empty result");
  if (y.cts.size() != ceil_div(y.rows * y.cols, y.n))
    throw ParamError("unpack: ciphertext count does not match layout");
  IntMat out(y.rows, y.cols);
  for (size_t c = 0; c < y.cts.size(); ++c) {
    auto vals = client.decrypt_signed(y.cts[c]);
    for (uint32_t s = 0; s < y.n; ++s) {
      uint64_t g = static_cast<uint64_t>(c) * y.n + s;
      if (g >= y.rows * y.cols) break;
      out(g / y.cols, g % y.cols) = vals[s];
    }
  }
  return out;
}

BaselineResult baseline_matmul(fpcrt::TwinBackend& be, const IntMat& x,
                               const IntMat& w, const EncodedBias& b,
                               OpCounters* counters) {
  if (x.rows == 0 || x.cols == 0 || w.cols == 0)
    throw ParamError("baseline: empty input");
  if (w.rows != x.cols)
    throw ParamError("baseline: input and weight shapes do not match");
  if (b.scaled.size() != w.cols)
    throw ParamError("baseline: bias length does not match output count");
  const uint32_t n = be.slot_count();
  const uint64_t rows = x.rows, f = x.cols, cols = w.cols;

  const auto& tp = be.params().t;
  uint64_t moduli[2] = {tp.t0, tp.t1};
  auto rep = fpcrt::capacity_check(f, be.params().scaling, moduli);
  if (!rep.ok)
    throw RangeError("baseline: product needs " +
                     std::to_string(rep.required_bits) +
                     " result bits, capacity is " +
                     std::to_string(rep.capacity_bits) + "; refusing");

  auto start = be.counters();
  const size_t blocks = static_cast<size_t>(ceil_div(rows, n));
  std::vector<std::vector<std::optional<TwinCipher>>> acc(
      blocks, std::vector<std::optional<TwinCipher>>(cols));
  std::vector<TwinPrepared> wk(cols);
  std::vector<int64_t> col;
  // One pass per feature: a single column ciphertext is live at a time, so
  // memory stays flat in f.
  for (uint64_t k = 0; k < f; ++k) {
    for (uint64_t j = 0; j < cols; ++j)
      wk[j] = be.prepare_constant_signed(w(k, j));
    for (size_t blk = 0; blk < blocks; ++blk) {
      uint64_t base = static_cast<uint64_t>(blk) * n;
      size_t rows_b = static_cast<size_t>(std::min<uint64_t>(n, rows - base));
      col.assign(rows_b, 0);
      for (size_t s = 0; s < rows_b; ++s) col[s] = x(base + s, k);
      TwinCipher ck = be.encrypt(be.encode_signed(col));
      for (uint64_t j = 0; j < cols; ++j) {
        TwinCipher p = ck;
        be.mul_plain_inplace(p, wk[j]);
        if (acc[blk][j])
          be.add_inplace(*acc[blk][j], p);
        else
          acc[blk][j] = std::move(p);
      }
    }
  }

  BaselineResult out;
  out.rows = rows;
  out.cols = cols;
  out.n = n;
  out.blocks.resize(blocks);
  for (size_t blk = 0; blk < blocks; ++blk) {
    for (uint64_t j = 0; j < cols; ++j) {
      TwinCipher ct = std::move(*acc[blk][j]);
      be.add_plain_inplace(
          ct, be.encode_signed(std::vector<int64_t>(n, b.scaled[j])));
      out.blocks[blk].push_back(std::move(ct));
    }
  }
  if (counters) {
    auto end = be.counters();
    counters->mul_plain_count = end.mul_plain - start.mul_plain;
    counters->rotation_count = end.rotation - start.rotation;
    counters->add_count = end.add - start.add;
    counters->ciphertexts_in = blocks * f;
    counters->ciphertexts_out = blocks * cols;
  }
  return out;
}

IntMat unpack_baseline(fpcrt::TwinBackend& client, const BaselineResult& y) {
  if (y.rows == 0 || y.cols == 0) throw ParamError("unpack: empty result");
  IntMat out(y.rows, y.cols);
  for (size_t blk = 0; blk < y.blocks.size(); ++blk) {
    uint64_t base = static_cast<uint64_t>(blk) * y.n;
    size_t rows_b = static_cast<size_t>(std::min<uint64_t>(y.n, y.rows - base));
    for (uint64_t j = 0; j < y.cols; ++j) {
      auto vals = client.decrypt_signed(y.blocks[blk][j]);
      for (size_t s = 0; s < rows_b; ++s) out(base + s, j) = vals[s];
    }
  }
  return out;
}

}  // namespace hei::matmul
