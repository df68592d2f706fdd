// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/kernels/modarith.hpp"
#include "hei/kernels/modops.hpp"

namespace hei::kernels::scalar {

namespace {

void add_mod(uint64_t* r, const uint64_t* a, const uint64_t* b, size_t n,
             uint64_t q) {
  for (size_t i = 0; i < n; ++i) r[i] = add_mod_1(a[i], b[i], q);
}

void sub_mod(uint64_t* r, const uint64_t* a, const uint64_t* b, size_t n,
             uint64_t q) {
  for (size_t i = 0; i < n; ++i) r[i] = sub_mod_1(a[i], b[i], q);
}

void neg_mod(uint64_t* r, const uint64_t* a, size_t n, uint64_t q) {
  for (size_t i = 0; i < n; ++i) r[i] = neg_mod_1(a[i], q);
}

void mul_mod_prepared(uint64_t* r, const uint64_t* a, const uint64_t* b,
                      const uint64_t* b_shoup, size_t n, uint64_t q) {
  for (size_t i = 0; i < n; ++i) r[i] = shoup_mul(a[i], b[i], b_shoup[i], q);
}

void mul_mod_scalar(uint64_t* r, const uint64_t* a, uint64_t w,
                    uint64_t w_shoup, size_t n, uint64_t q) {
  for (size_t i = 0; i < n; ++i) r[i] = shoup_mul(a[i], w, w_shoup, q);
}

void fma_mod_prepared(uint64_t* r, const uint64_t* a, const uint64_t* b,
                      const uint64_t* b_shoup, size_t n, uint64_t q) {
  for (size_t i = 0; i < n; ++i)
    r[i] = add_mod_1(r[i], shoup_mul(a[i], b[i], b_shoup[i], q), q);
}

void reduce_mod_u32(uint64_t* r, const uint64_t* a, size_t n, uint64_t q) {
  for (size_t i = 0; i < n; ++i) r[i] = a[i] % q;
}

void ntt_forward(uint64_t* a, const NttView& v) {
  const uint64_t q = v.q;
  size_t t = v.n >> 1;
  for (size_t m = 1; m < v.n; m <<= 1, t >>= 1) {
    for (size_t i = 0; i < m; ++i) {
      const uint64_t z = v.zetas[m + i];
      const uint64_t zs = v.zetas_shoup[m + i];
      uint64_t* p = a + 2 * i * t;
      for (size_t j = 0; j < t; ++j) {
        uint64_t x = p[j];
        uint64_t y = shoup_mul(p[j + t], z, zs, q);
        p[j] = add_mod_1(x, y, q);
        p[j + t] = sub_mod_1(x, y, q);
      }
    }
  }
}

void ntt_inverse(uint64_t* a, const NttView& v) {
  const uint64_t q = v.q;
  size_t t = 1;
  for (size_t m = v.n >> 1; m >= 1; m >>= 1, t <<= 1) {
    for (size_t i = 0; i < m; ++i) {
      const uint64_t z = v.inv_zetas[m + i];
      const uint64_t zs = v.inv_zetas_shoup[m + i];
      uint64_t* p = a + 2 * i * t;
      for (size_t j = 0; j < t; ++j) {
        uint64_t x = p[j];
        uint64_t y = p[j + t];
        p[j] = add_mod_1(x, y, q);
        p[j + t] = shoup_mul(sub_mod_1(x, y, q), z, zs, q);
      }
    }
  }
  for (size_t i = 0; i < v.n; ++i)
    a[i] = shoup_mul(a[i], v.inv_n, v.inv_n_shoup, q);
}

}  // namespace

const Kernels kTable = {add_mod,          sub_mod,        neg_mod,
                        mul_mod_prepared, mul_mod_scalar, fma_mod_prepared,
                        reduce_mod_u32,   ntt_forward,    ntt_inverse,
                        "scalar"};

void mul_mod_generic(uint64_t* r, const uint64_t* a, const uint64_t* b,
                     size_t n, uint64_t q) {
  for (size_t i = 0; i < n; ++i) r[i] = mul_mod_u128(a[i], b[i], q);
}

void reduce_mod_u64(uint64_t* r, const uint64_t* a, size_t n, uint64_t q) {
  for (size_t i = 0; i < n; ++i) r[i] = a[i] % q;
}

}  // namespace hei::kernels::scalar
