// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

// AVX2 variants of the element-wise modular kernels and the NTT. This TU is
// compiled with -mavx2 and only ever entered through select(), which checks
// CPU support and q < 2^31 first.
//
// All lanes hold values < 2^32, so 32x32->64 products via _mm256_mul_epu32
// are exact and signed 64-bit compares are safe. The per-element Shoup
// constant for a 32-bit reduction is the high half of the 64-bit one:
// floor(w * 2^32 / q) == floor(w * 2^64 / q) >> 32.

#include <immintrin.h>

#include "hei/kernels/modarith.hpp"
#include "hei/kernels/modops.hpp"

namespace hei::kernels {

namespace {

inline __m256i load4(const uint64_t* p) {
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
}

inline void store4(uint64_t* p, __m256i v) {
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(p), v);
}

// r = v - q if v >= q else v (v < 2q).
inline __m256i csub(__m256i v, __m256i qv) {
  __m256i lt = _mm256_cmpgt_epi64(qv, v);
  return _mm256_sub_epi64(v, _mm256_andnot_si256(lt, qv));
}

// x * w mod q, strict, with ws32 = per-lane floor(w * 2^32 / q). x < 2^32.
inline __m256i shoup4(__m256i x, __m256i w, __m256i ws32, __m256i qv) {
  __m256i q_hat = _mm256_srli_epi64(_mm256_mul_epu32(x, ws32), 32);
  __m256i prod = _mm256_mul_epu32(x, w);
  __m256i r = _mm256_sub_epi64(prod, _mm256_mul_epu32(q_hat, qv));
  return csub(r, qv);
}

inline __m256i add4(__m256i a, __m256i b, __m256i qv) {
  return csub(_mm256_add_epi64(a, b), qv);
}

inline __m256i sub4(__m256i a, __m256i b, __m256i qv) {
  return csub(_mm256_sub_epi64(_mm256_add_epi64(a, qv), b), qv);
}

void add_mod(uint64_t* r, const uint64_t* a, const uint64_t* b, size_t n,
             uint64_t q) {
  const __m256i qv = _mm256_set1_epi64x(static_cast<long long>(q));
  size_t i = 0;
  for (; i + 4 <= n; i += 4) store4(r + i, add4(load4(a + i), load4(b + i), qv));
  for (; i < n; ++i) r[i] = add_mod_1(a[i], b[i], q);
}

void sub_mod(uint64_t* r, const uint64_t* a, const uint64_t* b, size_t n,
             uint64_t q) {
  const __m256i qv = _mm256_set1_epi64x(static_cast<long long>(q));
  size_t i = 0;
  for (; i + 4 <= n; i += 4) store4(r + i, sub4(load4(a + i), load4(b + i), qv));
  for (; i < n; ++i) r[i] = sub_mod_1(a[i], b[i], q);
}

void neg_mod(uint64_t* r, const uint64_t* a, size_t n, uint64_t q) {
  const __m256i qv = _mm256_set1_epi64x(static_cast<long long>(q));
  const __m256i zero = _mm256_setzero_si256();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256i x = load4(a + i);
    __m256i neg = _mm256_sub_epi64(qv, x);
    __m256i is_zero = _mm256_cmpeq_epi64(x, zero);
    store4(r + i, _mm256_andnot_si256(is_zero, neg));
  }
  for (; i < n; ++i) r[i] = neg_mod_1(a[i], q);
}

void mul_mod_prepared(uint64_t* r, const uint64_t* a, const uint64_t* b,
                      const uint64_t* b_shoup, size_t n, uint64_t q) {
  const __m256i qv = _mm256_set1_epi64x(static_cast<long long>(q));
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256i ws32 = _mm256_srli_epi64(load4(b_shoup + i), 32);
    store4(r + i, shoup4(load4(a + i), load4(b + i), ws32, qv));
  }
  for (; i < n; ++i) r[i] = shoup_mul(a[i], b[i], b_shoup[i], q);
}

void mul_mod_scalar(uint64_t* r, const uint64_t* a, uint64_t w,
                    uint64_t w_shoup, size_t n, uint64_t q) {
  const __m256i qv = _mm256_set1_epi64x(static_cast<long long>(q));
  const __m256i wv = _mm256_set1_epi64x(static_cast<long long>(w));
  const __m256i ws32 = _mm256_set1_epi64x(static_cast<long long>(w_shoup >> 32));
  size_t i = 0;
  for (; i + 4 <= n; i += 4) store4(r + i, shoup4(load4(a + i), wv, ws32, qv));
  for (; i < n; ++i) r[i] = shoup_mul(a[i], w, w_shoup, q);
}

void fma_mod_prepared(uint64_t* r, const uint64_t* a, const uint64_t* b,
                      const uint64_t* b_shoup, size_t n, uint64_t q) {
  const __m256i qv = _mm256_set1_epi64x(static_cast<long long>(q));
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256i ws32 = _mm256_srli_epi64(load4(b_shoup + i), 32);
    __m256i prod = shoup4(load4(a + i), load4(b + i), ws32, qv);
    store4(r + i, add4(load4(r + i), prod, qv));
  }
  for (; i < n; ++i)
    r[i] = add_mod_1(r[i], shoup_mul(a[i], b[i], b_shoup[i], q), q);
}

void reduce_mod_u32(uint64_t* r, const uint64_t* a, size_t n, uint64_t q) {
  // Barrett with b32 = floor(2^32 / q): for x < 2^32 the remainder after one
  // conditional subtract is exact.
  const uint64_t b32 = (uint64_t(1) << 32) / q;
  const __m256i qv = _mm256_set1_epi64x(static_cast<long long>(q));
  const __m256i bv = _mm256_set1_epi64x(static_cast<long long>(b32));
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256i x = load4(a + i);
    __m256i q_hat = _mm256_srli_epi64(_mm256_mul_epu32(x, bv), 32);
    __m256i red = _mm256_sub_epi64(x, _mm256_mul_epu32(q_hat, qv));
    store4(r + i, csub(red, qv));
  }
  for (; i < n; ++i) r[i] = a[i] % q;
}

void ntt_forward(uint64_t* a, const NttView& v) {
  if (v.n < 8) {
    scalar::kTable.ntt_forward(a, v);
    return;
  }
  const uint64_t q = v.q;
  const __m256i qv = _mm256_set1_epi64x(static_cast<long long>(q));
  size_t t = v.n >> 1;
  for (size_t m = 1; m < v.n; m <<= 1, t >>= 1) {
    for (size_t i = 0; i < m; ++i) {
      const uint64_t z = v.zetas[m + i];
      const uint64_t zs = v.zetas_shoup[m + i];
      uint64_t* p = a + 2 * i * t;
      if (t >= 4) {
        const __m256i zv = _mm256_set1_epi64x(static_cast<long long>(z));
        const __m256i zs32 = _mm256_set1_epi64x(static_cast<long long>(zs >> 32));
        for (size_t j = 0; j < t; j += 4) {
          __m256i x = load4(p + j);
          __m256i y = shoup4(load4(p + j + t), zv, zs32, qv);
          store4(p + j, add4(x, y, qv));
          store4(p + j + t, sub4(x, y, qv));
        }
      } else {
        for (size_t j = 0; j < t; ++j) {
          uint64_t x = p[j];
          uint64_t y = shoup_mul(p[j + t], z, zs, q);
          p[j] = add_mod_1(x, y, q);
          p[j + t] = sub_mod_1(x, y, q);
        }
      }
    }
  }
}

void ntt_inverse(uint64_t* a, const NttView& v) {
  if (v.n < 8) {
    scalar::kTable.ntt_inverse(a, v);
    return;
  }
  const uint64_t q = v.q;
  const __m256i qv = _mm256_set1_epi64x(static_cast<long long>(q));
  size_t t = 1;
  for (size_t m = v.n >> 1; m >= 1; m >>= 1, t <<= 1) {
    for (size_t i = 0; i < m; ++i) {
      const uint64_t z = v.inv_zetas[m + i];
      const uint64_t zs = v.inv_zetas_shoup[m + i];
      uint64_t* p = a + 2 * i * t;
      if (t >= 4) {
        const __m256i zv = _mm256_set1_epi64x(static_cast<long long>(z));
        const __m256i zs32 = _mm256_set1_epi64x(static_cast<long long>(zs >> 32));
        for (size_t j = 0; j < t; j += 4) {
          __m256i x = load4(p + j);
          __m256i y = load4(p + j + t);
          store4(p + j, add4(x, y, qv));
          store4(p + j + t, shoup4(sub4(x, y, qv), zv, zs32, qv));
        }
      } else {
        for (size_t j = 0; j < t; ++j) {
          uint64_t x = p[j];
          uint64_t y = p[j + t];
          p[j] = add_mod_1(x, y, q);
          p[j + t] = shoup_mul(sub_mod_1(x, y, q), z, zs, q);
        }
      }
    }
  }
  mul_mod_scalar(a, a, v.inv_n, v.inv_n_shoup, v.n, q);
}

const Kernels kAvx2Table = {add_mod,          sub_mod,        neg_mod,
                            mul_mod_prepared, mul_mod_scalar, fma_mod_prepared,
                            reduce_mod_u32,   ntt_forward,    ntt_inverse,
                            "avx2"};

}  // namespace

const Kernels* avx2_kernels() { return &kAvx2Table; }

}  // namespace hei::kernels
