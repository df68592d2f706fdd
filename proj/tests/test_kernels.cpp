// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

// Equivalence of the AVX2 kernel set against the scalar reference, plus the
// single-value helpers they build on.

#include <doctest.h>

#include <cstdint>
#include <vector>

#include "hei/kernels/modarith.hpp"
#include "hei/kernels/modops.hpp"
#include "hei/ring/modulus.hpp"
#include "hei/ring/ntt_tables.hpp"
#include "hei/util/rng.hpp"

using namespace hei;

namespace {

std::vector<uint64_t> random_vec(size_t n, uint64_t bound, util::Prng& rng) {
  std::vector<uint64_t> v(n);
  for (auto& x : v) x = rng.uniform_u64(bound);
  return v;
}

// Moduli spanning the AVX2-eligible range, including one just under 2^31.
const uint64_t kTestModuli[] = {17, 97, 114689, 1073872897, 2147483629};

}  // namespace

TEST_CASE("shoup_mul matches wide multiplication") {
  util::Prng rng(7);
  for (uint64_t q : kTestModuli) {
    for (int i = 0; i < 200; ++i) {
      uint64_t w = rng.uniform_u64(q);
      uint64_t ws = kernels::shoup_precompute(w, q);
      uint64_t x = rng.next();  // any 64-bit value is valid
      CHECK(kernels::shoup_mul(x, w, ws, q) == kernels::mul_mod_u128(x, w, q));
    }
  }
}

TEST_CASE("pow_mod and inv_mod") {
  CHECK(kernels::pow_mod(3, 0, 97) == 1);
  CHECK(kernels::pow_mod(3, 96, 97) == 1);  // Fermat
  for (uint64_t a = 1; a < 97; ++a) {
    uint64_t inv = kernels::inv_mod(a, 97);
    CHECK(kernels::mul_mod_u128(a, inv, 97) == 1);
  }
  CHECK_THROWS_AS((void)kernels::inv_mod(6, 9), ParamError);
}

TEST_CASE("avx2 kernels match scalar reference") {
  const kernels::Kernels* avx = kernels::avx2_kernels();
  if (!avx || !kernels::avx2_available()) {
    MESSAGE("AVX2 unavailable; dispatch equivalence not exercised here");
    return;
  }
  util::Prng rng(11);
  const auto& ref = kernels::scalar::kTable;
  // Sizes around the 4-lane width to cover vector body and scalar tail.
  for (size_t n : {1u, 3u, 4u, 5u, 8u, 31u, 1024u}) {
    for (uint64_t q : kTestModuli) {
      auto a = random_vec(n, q, rng);
      auto b = random_vec(n, q, rng);
      std::vector<uint64_t> bs(n);
      for (size_t i = 0; i < n; ++i)
        bs[i] = kernels::shoup_precompute(b[i], q);
      std::vector<uint64_t> r0(n), r1(n);

      ref.add_mod(r0.data(), a.data(), b.data(), n, q);
      avx->add_mod(r1.data(), a.data(), b.data(), n, q);
      CHECK(r0 == r1);

      ref.sub_mod(r0.data(), a.data(), b.data(), n, q);
      avx->sub_mod(r1.data(), a.data(), b.data(), n, q);
      CHECK(r0 == r1);

      ref.neg_mod(r0.data(), a.data(), n, q);
      avx->neg_mod(r1.data(), a.data(), n, q);
      CHECK(r0 == r1);

      ref.mul_mod_prepared(r0.data(), a.data(), b.data(), bs.data(), n, q);
      avx->mul_mod_prepared(r1.data(), a.data(), b.data(), bs.data(), n, q);
      CHECK(r0 == r1);

      uint64_t w = rng.uniform_u64(q);
      uint64_t ws = kernels::shoup_precompute(w, q);
      ref.mul_mod_scalar(r0.data(), a.data(), w, ws, n, q);
      avx->mul_mod_scalar(r1.data(), a.data(), w, ws, n, q);
      CHECK(r0 == r1);

      auto acc0 = random_vec(n, q, rng);
      auto acc1 = acc0;
      ref.fma_mod_prepared(acc0.data(), a.data(), b.data(), bs.data(), n, q);
      avx->fma_mod_prepared(acc1.data(), a.data(), b.data(), bs.data(), n, q);
      CHECK(acc0 == acc1);

      auto wide = random_vec(n, uint64_t(1) << 32, rng);
      ref.reduce_mod_u32(r0.data(), wide.data(), n, q);
      avx->reduce_mod_u32(r1.data(), wide.data(), n, q);
      CHECK(r0 == r1);
    }
  }
}

TEST_CASE("avx2 ntt matches scalar ntt") {
  const kernels::Kernels* avx = kernels::avx2_kernels();
  if (!avx || !kernels::avx2_available()) return;
  util::Prng rng(13);
  for (uint32_t n : {8u, 32u, 256u, 8192u}) {
    auto primes = ring::find_ntt_primes(31, n, 1);
    for (uint64_t q : {primes[0].value(), uint64_t(1073872897)}) {
      if ((q - 1) % (2 * n) != 0) continue;
      ring::NttTables tables(n, q);
      auto a = random_vec(n, q, rng);
      auto b = a;
      kernels::scalar::kTable.ntt_forward(a.data(), tables.view());
      avx->ntt_forward(b.data(), tables.view());
      CHECK(a == b);
      kernels::scalar::kTable.ntt_inverse(a.data(), tables.view());
      avx->ntt_inverse(b.data(), tables.view());
      CHECK(a == b);
    }
  }
}

TEST_CASE("dispatch respects width, cpu flags and the scalar override") {
  // q >= 2^31 must always resolve to scalar.
  CHECK(std::string(kernels::active_isa(uint64_t(1) << 31)) == "scalar");
  CHECK(std::string(kernels::active_isa((uint64_t(1) << 40) + 1)) == "scalar");

  const char* small = kernels::active_isa(1073872897);
  if (kernels::avx2_available() && kernels::avx2_kernels()) {
    CHECK(std::string(small) == "avx2");
  } else {
    CHECK(std::string(small) == "scalar");
  }

  kernels::force_scalar(true);
  CHECK(std::string(kernels::active_isa(1073872897)) == "scalar");
  kernels::force_scalar(false);
  CHECK(std::string(kernels::active_isa(1073872897)) == std::string(small));
}
