// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "hei/util/errors.hpp"

namespace hei::kernels {

// Single-value modular arithmetic used by table building, key generation and
// the scalar kernels. Vector counterparts live in modops.hpp.

inline uint64_t add_mod_1(uint64_t a, uint64_t b, uint64_t q) {
  uint64_t s = a + b;  // a, b < q < 2^63: no overflow
  return s >= q ? s - q : s;
}

inline uint64_t sub_mod_1(uint64_t a, uint64_t b, uint64_t q) {
  return a >= b ? a - b : a + q - b;
}

inline uint64_t neg_mod_1(uint64_t a, uint64_t q) { return a == 0 ? 0 : q - a; }

inline uint64_t mulhi64(uint64_t a, uint64_t b) {
  return static_cast<uint64_t>(
      (static_cast<unsigned __int128>(a) * b) >> 64);
}

inline uint64_t mul_mod_u128(uint64_t a, uint64_t b, uint64_t q) {
  return static_cast<uint64_t>(
      (static_cast<unsigned __int128>(a) * b) % q);
}

// floor(w * 2^64 / q). Requires w < q.
inline uint64_t shoup_precompute(uint64_t w, uint64_t q) {
  return static_cast<uint64_t>(
      ((static_cast<unsigned __int128>(w)) << 64) / q);
}

// x * w mod q with precomputed w_shoup = floor(w * 2^64 / q). Valid for any
// x < 2^64 and w < q; strict result in [0, q).
inline uint64_t shoup_mul(uint64_t x, uint64_t w, uint64_t w_shoup,
                          uint64_t q) {
  uint64_t q_hat = mulhi64(x, w_shoup);
  uint64_t r = x * w - q_hat * q;  // exact mod 2^64, r < 2q
  return r >= q ? r - q : r;
}

inline uint64_t pow_mod(uint64_t base, uint64_t exp, uint64_t q) {
  uint64_t r = 1 % q;
  base %= q;
  while (exp) {
    if (exp & 1) r = mul_mod_u128(r, base, q);
    base = mul_mod_u128(base, base, q);
    exp >>= 1;
  }
  return r;
}

// Modular inverse via extended Euclid; throws if gcd(a, q) != 1.
inline uint64_t inv_mod(uint64_t a, uint64_t q) {
  int64_t t = 0, new_t = 1;
  int64_t r = static_cast<int64_t>(q), new_r = static_cast<int64_t>(a % q);
  while (new_r != 0) {
    int64_t quot = r / new_r;
    int64_t tmp = t - quot * new_t;
    t = new_t;
    new_t = tmp;
    tmp = r - quot * new_r;
    r = new_r;
    new_r = tmp;
  }
  if (r != 1) throw hei::ParamError("inv_mod: value not invertible");
  if (t < 0) t += static_cast<int64_t>(q);
  return static_cast<uint64_t>(t);
}

}  // namespace hei::kernels
