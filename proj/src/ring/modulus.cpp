// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/ring/modulus.hpp"

#include <algorithm>

#include "hei/kernels/modarith.hpp"
#include "hei/util/bits.hpp"
#include "hei/util/errors.hpp"

namespace hei::ring {

Modulus::Modulus(uint64_t value) : value_(value) {
  if (value < 2) throw ParamError("modulus must be >= 2");
  if (value >= (uint64_t(1) << 62))
    throw ParamError("modulus must be below 2^62");
  bits_ = static_cast<int>(util::msb_index(value)) + 1;
}

bool Modulus::is_prime() const { return is_prime_u64(value_); }

bool is_prime_u64(uint64_t v) {
  if (v < 2) return false;
  for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull,
                     23ull, 29ull, 31ull, 37ull}) {
    if (v == p) return true;
    if (v % p == 0) return false;
  }
  uint64_t d = v - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  // This witness set decides primality for every 64-bit integer.
  for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull,
                     23ull, 29ull, 31ull, 37ull}) {
    uint64_t x = kernels::pow_mod(a, d, v);
    if (x == 1 || x == v - 1) continue;
    bool witness = true;
    for (int i = 1; i < r; ++i) {
      x = kernels::mul_mod_u128(x, x, v);
      if (x == v - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

std::vector<Modulus> find_ntt_primes(int bits, uint32_t n, size_t count,
                                     const std::vector<uint64_t>& avoid) {
  if (bits < 8 || bits > 61) throw ParamError("prime size out of range");
  if (!util::is_power_of_two(n)) throw ParamError("n must be a power of two");
  const uint64_t two_n = 2 * static_cast<uint64_t>(n);
  std::vector<Modulus> out;
  // Largest candidate below 2^bits congruent to 1 mod 2n.
  uint64_t c = ((((uint64_t(1) << bits) - 2) / two_n) * two_n) + 1;
  while (out.size() < count && c > (uint64_t(1) << (bits - 1))) {
    bool skip = std::find(avoid.begin(), avoid.end(), c) != avoid.end();
    if (!skip && is_prime_u64(c)) out.emplace_back(c);
    if (c < two_n) break;
    c -= two_n;
  }
  if (out.size() < count)
    throw ParamError("not enough NTT-friendly primes of the requested size");
  return out;
}

uint64_t primitive_root_2n(uint32_t n, uint64_t q) {
  if (!util::is_power_of_two(n)) throw ParamError("n must be a power of two");
  const uint64_t two_n = 2 * static_cast<uint64_t>(n);
  if ((q - 1) % two_n != 0)
    throw ParamError("modulus is not NTT-friendly for this n");
  const uint64_t exp = (q - 1) / two_n;
  for (uint64_t c = 2; c < q; ++c) {
    uint64_t w = kernels::pow_mod(c, exp, q);
    // w has order exactly 2n iff w^n = -1.
    if (kernels::pow_mod(w, n, q) == q - 1) return w;
  }
  throw ParamError("no primitive root found");
}

}  // namespace hei::ring
