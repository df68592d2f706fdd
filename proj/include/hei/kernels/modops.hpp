// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

namespace hei::kernels {

// View of precomputed NTT constants for one (n, q). Owned by ring::NttTables.
// zetas[k] = psi^{bitrev(k)} for a fixed primitive 2n-th root psi, k in [1,n);
// index 0 is unused. inv_zetas[k] = zetas[k]^{-1}. *_shoup hold the matching
// floor(w * 2^64 / q) constants.
struct NttView {
  uint32_t n = 0;
  uint64_t q = 0;
  const uint64_t* zetas = nullptr;
  const uint64_t* zetas_shoup = nullptr;
  const uint64_t* inv_zetas = nullptr;
  const uint64_t* inv_zetas_shoup = nullptr;
  uint64_t inv_n = 0;
  uint64_t inv_n_shoup = 0;
};

// Element-wise kernels over uint64 arrays. Unless stated otherwise inputs are
// strictly reduced (< q) and outputs are strictly reduced. Aliasing r == a or
// r == b is allowed (pure element-wise loops).
struct Kernels {
  void (*add_mod)(uint64_t* r, const uint64_t* a, const uint64_t* b, size_t n,
                  uint64_t q);
  void (*sub_mod)(uint64_t* r, const uint64_t* a, const uint64_t* b, size_t n,
                  uint64_t q);
  void (*neg_mod)(uint64_t* r, const uint64_t* a, size_t n, uint64_t q);
  // r[i] = a[i] * b[i] mod q; b_shoup[i] = floor(b[i] * 2^64 / q).
  void (*mul_mod_prepared)(uint64_t* r, const uint64_t* a, const uint64_t* b,
                           const uint64_t* b_shoup, size_t n, uint64_t q);
  // r[i] = a[i] * w mod q for a single constant w.
  void (*mul_mod_scalar)(uint64_t* r, const uint64_t* a, uint64_t w,
                         uint64_t w_shoup, size_t n, uint64_t q);
  // r[i] = (r[i] + a[i] * b[i]) mod q; prepared b.
  void (*fma_mod_prepared)(uint64_t* r, const uint64_t* a, const uint64_t* b,
                           const uint64_t* b_shoup, size_t n, uint64_t q);
  // r[i] = a[i] mod q for a[i] < 2^32 (not necessarily < q).
  void (*reduce_mod_u32)(uint64_t* r, const uint64_t* a, size_t n, uint64_t q);
  // In-place negacyclic NTT, natural order in / bit-reversed order out.
  void (*ntt_forward)(uint64_t* a, const NttView& v);
  // In-place inverse, bit-reversed order in / natural order out (scaled 1/n).
  void (*ntt_inverse)(uint64_t* a, const NttView& v);
  const char* isa;
};

namespace scalar {
extern const Kernels kTable;
// r[i] = a[i] * b[i] mod q with no precomputation (cold paths only).
void mul_mod_generic(uint64_t* r, const uint64_t* a, const uint64_t* b,
                     size_t n, uint64_t q);
// r[i] = a[i] mod q for arbitrary a[i] < 2^64.
void reduce_mod_u64(uint64_t* r, const uint64_t* a, size_t n, uint64_t q);
}  // namespace scalar

// nullptr when this build carries no AVX2 translation unit.
const Kernels* avx2_kernels();

bool avx2_available();           // CPU supports AVX2
void force_scalar(bool on);      // test hook: pin dispatch to scalar
bool scalar_forced();

// Kernel set for a modulus: AVX2 when the CPU supports it, the TU is built,
// q < 2^31 and scalar is not forced; scalar reference otherwise.
const Kernels& select(uint64_t q);

// "avx2" or "scalar" for the path select(q) resolves to.
const char* active_isa(uint64_t q);

}  // namespace hei::kernels
