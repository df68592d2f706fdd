// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "hei/matmul/matmul.hpp"
#include "hei/util/errors.hpp"
#include "hei/util/rng.hpp"

using namespace hei;
using namespace hei::matmul;
using fpcrt::ScalingConfig;
using fpcrt::TwinParams;
using util::IntMat;

namespace {

struct TwinRig {
  fpcrt::TwinContext ctx;
  fpcrt::TwinKeys keys;
  std::unique_ptr<fpcrt::TwinBackend> client;

  explicit TwinRig(const TwinParams& p, uint64_t seed = 7) : ctx(p) {
    util::Prng rng(seed);
    keys = ctx.keygen(rng);
    client = ctx.client_backend(keys, seed + 1);
  }
};

// Small ring, small moduli pair, scaling chosen so f up to a few hundred
// passes the capacity gate with room to spare.
TwinParams tiny_params(uint32_t n) {
  return TwinParams{n, {7681, 12289}, 0, ScalingConfig{2, 3, 3}};
}

IntMat oracle_matmul(const IntMat& x, const IntMat& w,
                     std::span<const int64_t> bias) {
  IntMat out(x.rows, w.cols);
  for (size_t i = 0; i < x.rows; ++i)
    for (size_t j = 0; j < w.cols; ++j) {
      __int128 acc = bias[j];
      for (size_t k = 0; k < x.cols; ++k)
        acc += static_cast<__int128>(x(i, k)) * w(k, j);
      out(i, j) = static_cast<int64_t>(acc);
    }
  return out;
}

int64_t signed_uniform(util::Prng& rng, int64_t mag) {
  return static_cast<int64_t>(rng.uniform_u64(2 * mag + 1)) - mag;
}

IntMat random_mat(util::Prng& rng, size_t r, size_t c, int64_t mag) {
  IntMat m(r, c);
  for (auto& v : m.a) v = signed_uniform(rng, mag);
  return m;
}

}  // namespace

TEST_CASE("worked 2x3 by 3x2 product lands in the documented slots") {
  TwinRig rig(TwinParams{8, {97, 17}, 0, ScalingConfig{1, 1, 2}});
  auto& be = *rig.client;

  IntMat x(2, 3);
  x.a = {1, 2, 3, 4, 5, 6};
  IntMat w(3, 2);
  w.a = {1, 0, 0, 1, 1, 1};
  EncodedBias bias{std::vector<int64_t>(2, 0)};

  auto ex = encode_inputs(be, x);
  CHECK(ex.rows.size() == 2);
  CHECK(ex.rows[0].chunks.size() == 1);
  auto ew = encode_weights(be, w);
  OpCounters ops;
  auto packed = matmul::matmul(be, ex, ew, bias, &ops);

  REQUIRE(packed.cts.size() == 1);
  auto slots = be.decrypt_signed(packed.cts[0]);
  CHECK(slots[0] == 4);
  CHECK(slots[1] == 5);
  CHECK(slots[2] == 10);
  CHECK(slots[3] == 11);
  for (size_t s = 4; s < 8; ++s) CHECK(slots[s] == 0);

  auto mat = unpack_results(be, packed);
  CHECK(mat(0, 0) == 4);
  CHECK(mat(0, 1) == 5);
  CHECK(mat(1, 0) == 10);
  CHECK(mat(1, 1) == 11);

  auto expect = proposed_counts(2, 2, 3, 8);
  CHECK(ops.mul_plain_count == expect.mul_plain_count);
  CHECK(ops.rotation_count == expect.rotation_count);
  CHECK(ops.add_count == expect.add_count);
  CHECK(ops.ciphertexts_in == 2);
  CHECK(ops.ciphertexts_out == 1);
}

TEST_CASE("result spanning several ciphertexts keeps layout and zero tail") {
  TwinRig rig(tiny_params(8));
  auto& be = *rig.client;
  util::Prng rng(11);

  IntMat x = random_mat(rng, 9, 5, 20);
  IntMat w = random_mat(rng, 5, 3, 7);
  std::vector<int64_t> bias = {9, -4, 17};

  auto packed = matmul::matmul(be, encode_inputs(be, x), encode_weights(be, w),
                       EncodedBias{bias});
  // 27 results over 8 slots per ciphertext.
  REQUIRE(packed.cts.size() == 4);
  auto mat = unpack_results(be, packed);
  CHECK(mat == oracle_matmul(x, w, bias));

  auto tail = be.decrypt_signed(packed.cts[3]);
  for (size_t s = 3; s < 8; ++s) CHECK(tail[s] == 0);
}

TEST_CASE("zero inputs leave exactly the bias pattern") {
  TwinRig rig(tiny_params(8));
  auto& be = *rig.client;

  IntMat x(3, 4);  // all zero
  util::Prng rng(3);
  IntMat w = random_mat(rng, 4, 2, 7);
  std::vector<int64_t> bias = {21, -33};

  auto mat = unpack_results(
      be, matmul::matmul(be, encode_inputs(be, x), encode_weights(be, w),
                 EncodedBias{bias}));
  for (size_t i = 0; i < 3; ++i) {
    CHECK(mat(i, 0) == 21);
    CHECK(mat(i, 1) == -33);
  }
}

TEST_CASE("bias scaling uses the combined input and weight scale") {
  ScalingConfig cfg{1, 1, 2};  // combined scale 2^2
  double bs[] = {0.5, -1.25, 0.0};
  auto eb = encode_bias(bs, cfg);
  REQUIRE(eb.scaled.size() == 3);
  CHECK(eb.scaled[0] == 2);
  CHECK(eb.scaled[1] == -5);
  CHECK(eb.scaled[2] == 0);
}

TEST_CASE("input row chunking pads the tail chunk") {
  TwinRig rig(tiny_params(8));
  auto& be = *rig.client;

  std::vector<int64_t> row = {5, -3, 2};
  auto enc = encode_input_row(be, row);
  REQUIRE(enc.chunks.size() == 1);
  auto slots = be.decrypt_signed(enc.chunks[0]);
  CHECK(slots == std::vector<int64_t>{5, -3, 2, 0, 0, 0, 0, 0});

  std::vector<int64_t> wide(8 + 3, 1);
  CHECK(encode_input_row(be, wide).chunks.size() == 2);
  std::vector<int64_t> exact(8, 1);
  CHECK(encode_input_row(be, exact).chunks.size() == 1);
}

TEST_CASE("random shapes match the integer oracle on both backends") {
  for (uint32_t n : {8u, 32u}) {
    TwinRig rig(tiny_params(n), 40 + n);
    auto clear = rig.ctx.clear_backend();
    util::Prng rng(100 + n);

    for (int trial = 0; trial < 50; ++trial) {
      size_t r = 1 + rng.uniform_u64(10);
      size_t c = 1 + rng.uniform_u64(5);
      size_t f = 1 + rng.uniform_u64(3 * n);
      IntMat x = random_mat(rng, r, f, 32);
      IntMat w = random_mat(rng, f, c, 8);
      std::vector<int64_t> bias(c);
      for (auto& b : bias) b = signed_uniform(rng, 1000);
      IntMat want = oracle_matmul(x, w, bias);

      fpcrt::TwinBackend* backends[2] = {rig.client.get(), clear.get()};
      for (auto* be : backends) {
        OpCounters ops;
        auto got = unpack_results(
            *be, matmul::matmul(*be, encode_inputs(*be, x), encode_weights(*be, w),
                        EncodedBias{bias}, &ops));
        CHECK(got == want);

        auto cf = proposed_counts(r, c, f, n);
        CHECK(ops.mul_plain_count == cf.mul_plain_count);
        CHECK(ops.rotation_count == cf.rotation_count);
        CHECK(ops.add_count == cf.add_count);
        CHECK(ops.ciphertexts_in == cf.ciphertexts_in);
        CHECK(ops.ciphertexts_out == cf.ciphertexts_out);
      }
    }
  }
}

TEST_CASE("production ring size smoke run") {
  TwinRig rig(fpcrt::production_params(), 99);
  auto& be = *rig.client;
  util::Prng rng(17);

  // Two chunks per row at n=8192.
  size_t f = 10000;
  IntMat x = random_mat(rng, 2, f, 1 << 13);
  IntMat w = random_mat(rng, f, 3, 1 << 13);
  std::vector<int64_t> bias = {1234567, -7654321, 42};

  OpCounters ops;
  auto got = unpack_results(
      be, matmul::matmul(be, encode_inputs(be, x), encode_weights(be, w),
                 EncodedBias{bias}, &ops));
  CHECK(got == oracle_matmul(x, w, bias));
  CHECK(ops.mul_plain_count == 2 * 3 * 3);  // two chunks + mask per pair
  CHECK(ops.rotation_count == 2 * 3 * 13);
}

TEST_CASE("values filling the full precision range survive the roundtrip") {
  // 44-bit products on the production moduli pair, small ring.
  TwinParams p{8, {}, 0, ScalingConfig{0, 22, 22}};
  TwinRig rig(p, 5);
  auto& be = *rig.client;

  IntMat x(1, 1);
  IntMat w(1, 1);
  x(0, 0) = int64_t{1} << 21;
  w(0, 0) = int64_t{1} << 22;
  std::vector<int64_t> bias = {0};

  auto run = [&](int64_t xv, int64_t wv, int64_t bv) {
    x(0, 0) = xv;
    w(0, 0) = wv;
    bias[0] = bv;
    auto mat = unpack_results(
        be, matmul::matmul(be, encode_inputs(be, x), encode_weights(be, w),
                   EncodedBias{bias}));
    return mat(0, 0);
  };

  CHECK(run(int64_t{1} << 21, int64_t{1} << 22, 0) == (int64_t{1} << 43));
  CHECK(run(-(int64_t{1} << 21), int64_t{1} << 22, 0) == -(int64_t{1} << 43));
  CHECK(run(int64_t{1} << 21, int64_t{1} << 22, -1) ==
        (int64_t{1} << 43) - 1);
  CHECK(run((int64_t{1} << 21) - 1, -(int64_t{1} << 22) + 1, 12345) ==
        -((int64_t{1} << 43) - (int64_t{1} << 22) - (int64_t{1} << 21) + 1) +
            12345);
}

TEST_CASE("baseline computes the same matrices") {
  for (uint32_t n : {8u, 32u}) {
    TwinRig rig(tiny_params(n), 60 + n);
    auto& be = *rig.client;
    util::Prng rng(200 + n);

    for (int trial = 0; trial < 8; ++trial) {
      size_t r = 1 + rng.uniform_u64(2 * n);  // exercise multi-block
      size_t c = 1 + rng.uniform_u64(4);
      size_t f = 1 + rng.uniform_u64(2 * n);
      IntMat x = random_mat(rng, r, f, 32);
      IntMat w = random_mat(rng, f, c, 8);
      std::vector<int64_t> bias(c);
      for (auto& b : bias) b = signed_uniform(rng, 1000);

      OpCounters ops;
      auto base = unpack_baseline(
          be, baseline_matmul(be, x, w, EncodedBias{bias}, &ops));
      CHECK(base == oracle_matmul(x, w, bias));

      auto prop = unpack_results(
          be, matmul::matmul(be, encode_inputs(be, x), encode_weights(be, w),
                     EncodedBias{bias}));
      CHECK(base == prop);

      auto cf = baseline_counts(r, c, f, n);
      CHECK(ops.mul_plain_count == cf.mul_plain_count);
      CHECK(ops.rotation_count == 0);
      CHECK(ops.add_count == cf.add_count);
      CHECK(ops.ciphertexts_in == cf.ciphertexts_in);
      CHECK(ops.ciphertexts_out == cf.ciphertexts_out);
    }
  }
}

TEST_CASE("closed form operation counts at reported shapes") {
  // Single pair, one chunk: the minimum circuit.
  auto one = proposed_counts(1, 1, 8, 8);
  CHECK(one.mul_plain_count == 2);
  CHECK(one.rotation_count == 3);
  CHECK(one.add_count == 1 + 3);

  // Single sample over the wide genomics shape.
  auto single = proposed_counts(1, 11, 40960, 8192);
  CHECK(single.mul_plain_count == 66);  // 55 chunk products + 11 masks
  CHECK(single.rotation_count == 143);
  CHECK(single.ciphertexts_in == 5);

  auto batch = proposed_counts(543, 11, 40960, 8192);
  CHECK(batch.mul_plain_count == 35838);
  CHECK(batch.ciphertexts_out == 1);

  auto base = baseline_counts(1, 11, 40960, 8192);
  CHECK(base.mul_plain_count == 450560);
  CHECK(base.rotation_count == 0);

  // Sample batching: any row count within one block costs the same.
  auto b1 = baseline_counts(1, 11, 40960, 8192);
  auto b2 = baseline_counts(77, 11, 40960, 8192);
  auto b3 = baseline_counts(8192, 11, 40960, 8192);
  CHECK(b1.mul_plain_count == b2.mul_plain_count);
  CHECK(b2.mul_plain_count == b3.mul_plain_count);
  CHECK(b1.add_count == b3.add_count);

  CHECK_THROWS_AS(proposed_counts(0, 1, 1, 8), ParamError);
  CHECK_THROWS_AS(proposed_counts(1, 1, 1, 12), ParamError);
}

TEST_CASE("row arrival order does not change the result") {
  TwinRig rig(tiny_params(8), 31);
  auto& be = *rig.client;
  util::Prng rng(400);

  IntMat x = random_mat(rng, 7, 10, 32);
  IntMat w = random_mat(rng, 10, 3, 8);
  std::vector<int64_t> bias = {5, 6, 7};
  auto ex = encode_inputs(be, x);
  auto ew = encode_weights(be, w);

  auto in_order = unpack_results(be, matmul::matmul(be, ex, ew, EncodedBias{bias}));

  std::vector<size_t> order(7);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuf(9);
  for (int round = 0; round < 3; ++round) {
    std::shuffle(order.begin(), order.end(), shuf);
    MatmulStream stream(be, ew, EncodedBias{bias}, 7);
    for (size_t i : order) stream.push_row(i, ex.rows[i]);
    CHECK(unpack_results(be, stream.finish()) == in_order);
  }

  // Same answer when rows are pushed from a worker pool.
  OpCounters ops;
  auto parallel =
      unpack_results(be, matmul::matmul(be, ex, ew, EncodedBias{bias}, &ops, 4));
  CHECK(parallel == in_order);
  auto cf = proposed_counts(7, 3, 10, 8);
  CHECK(ops.add_count == cf.add_count);
}

TEST_CASE("stream rejects misuse") {
  TwinRig rig(tiny_params(8), 77);
  auto& be = *rig.client;
  util::Prng rng(500);

  IntMat x = random_mat(rng, 3, 4, 10);
  IntMat w = random_mat(rng, 4, 2, 5);
  EncodedBias bias{{1, 2}};
  auto ex = encode_inputs(be, x);
  auto ew = encode_weights(be, w);

  MatmulStream stream(be, ew, bias, 3);
  stream.push_row(0, ex.rows[0]);
  CHECK_THROWS_AS(stream.push_row(0, ex.rows[0]), ParamError);  // duplicate
  CHECK_THROWS_AS(stream.push_row(3, ex.rows[1]), ParamError);  // out of range
  CHECK_THROWS_AS(stream.counters(), ParamError);               // not finished
  CHECK_THROWS_AS(stream.finish(), ParamError);                 // rows missing
  stream.push_row(1, ex.rows[1]);
  stream.push_row(2, ex.rows[2]);
  auto packed = stream.finish();
  CHECK(packed.cts.size() == 1);
  CHECK_THROWS_AS(stream.finish(), ParamError);
  CHECK_THROWS_AS(stream.push_row(0, ex.rows[0]), ParamError);

  // Wrong chunk count for these weights.
  IntMat xwide = random_mat(rng, 1, 20, 10);
  auto exw = encode_inputs(be, xwide);
  MatmulStream s2(be, ew, bias, 1);
  CHECK_THROWS_AS(s2.push_row(0, exw.rows[0]), ParamError);
}

TEST_CASE("shape and key errors") {
  TwinRig rig(tiny_params(8), 88);
  auto& be = *rig.client;
  util::Prng rng(600);

  IntMat empty;
  CHECK_THROWS_AS(encode_inputs(be, empty), ParamError);
  CHECK_THROWS_AS(encode_weights(be, empty), ParamError);

  IntMat x = random_mat(rng, 2, 4, 10);
  IntMat w = random_mat(rng, 5, 2, 5);  // f mismatch: 4 vs 5
  auto ex = encode_inputs(be, x);
  auto ew = encode_weights(be, w);
  CHECK_THROWS_AS(matmul::matmul(be, ex, ew, EncodedBias{{1, 2}}), ParamError);
  CHECK_THROWS_AS(baseline_matmul(be, x, w, EncodedBias{{1, 2}}), ParamError);

  // Bias length must match the output count.
  IntMat w4 = random_mat(rng, 4, 2, 5);
  auto ew4 = encode_weights(be, w4);
  CHECK_THROWS_AS(matmul::matmul(be, ex, ew4, EncodedBias{{1, 2, 3}}), ParamError);

  // No rotation keys: the fold cannot run.
  auto norot = rig.ctx.client_backend(rig.keys, 3, false);
  auto exn = encode_inputs(*norot, x);
  auto ewn = encode_weights(*norot, w4);
  CHECK_THROWS_AS(matmul::matmul(*norot, exn, ewn, EncodedBias{{1, 2}}), KeyError);
}

TEST_CASE("capacity gate refuses oversized products") {
  // Default scaling needs 44 bits at this width; the tiny pair holds 26.
  TwinRig rig(TwinParams{8, {7681, 12289}, 0, ScalingConfig{}}, 21);
  auto& be = *rig.client;
  util::Prng rng(700);

  IntMat x = random_mat(rng, 1, 4, 10);
  IntMat w = random_mat(rng, 4, 1, 5);
  auto ew = encode_weights(be, w);
  CHECK_THROWS_AS(MatmulStream(be, ew, EncodedBias{{0}}, 1), RangeError);
  CHECK_THROWS_AS(baseline_matmul(be, x, w, EncodedBias{{0}}), RangeError);

  // Same shape passes once the scaling fits.
  TwinRig ok(tiny_params(8), 22);
  auto ew2 = encode_weights(*ok.client, w);
  MatmulStream fine(*ok.client, ew2, EncodedBias{{0}}, 1);
}
