// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/bfv/params.hpp"

#include <set>
#include <string>

#include "hei/ring/modulus.hpp"
#include "hei/util/bits.hpp"
#include "hei/util/errors.hpp"

namespace hei::bfv {

int max_q_bits_128(uint32_t n) {
  switch (n) {
    case 1024: return 27;
    case 2048: return 54;
    case 4096: return 109;
    case 8192: return 218;
    case 16384: return 438;
    case 32768: return 881;
    default: return 0;
  }
}

void EncryptionParams::validate() const {
  if (!util::is_power_of_two(n) || n < 8 || n > 32768)
    throw ParamError("ring degree must be a power of two in [8, 32768]");
  const uint64_t two_n = 2 * static_cast<uint64_t>(n);
  if (t < 2 || t % two_n != 1)
    throw ParamError("plaintext modulus " + std::to_string(t) +
                     " is not 1 mod 2n; slot batching is unavailable");
  if (!ring::is_prime_u64(t))
    throw ParamError("plaintext modulus must be prime");
  if (q.empty()) throw ParamError("ciphertext modulus chain is empty");
  std::set<uint64_t> seen;
  for (uint64_t qi : q) {
    if (!ring::is_prime_u64(qi))
      throw ParamError("ciphertext modulus " + std::to_string(qi) +
                       " is not prime");
    if (qi % two_n != 1)
      throw ParamError("ciphertext modulus " + std::to_string(qi) +
                       " is not 1 mod 2n");
    if (qi == t)
      throw ParamError("ciphertext modulus collides with plaintext modulus");
    if (!seen.insert(qi).second)
      throw ParamError("duplicate ciphertext modulus");
  }
  if (security_level == 0) return;
  if (security_level != 128)
    throw ParamError("supported security levels: 0 (none), 128");
  int cap = max_q_bits_128(n);
  if (cap == 0)
    throw ParamError("no 128-bit security estimate for this ring degree");
  if (total_q_bits() > cap)
    throw ParamError("log2(q) = " + std::to_string(total_q_bits()) +
                     " exceeds the 128-bit ceiling " + std::to_string(cap) +
                     " at n = " + std::to_string(n));
}

int EncryptionParams::total_q_bits() const {
  int bits = 0;
  for (uint64_t qi : q) bits += ring::Modulus(qi).bits();
  return bits;
}

uint64_t EncryptionParams::hash() const {
  // FNV-1a over the defining fields.
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ull;
    }
  };
  mix(n);
  mix(t);
  mix(static_cast<uint64_t>(security_level));
  for (uint64_t qi : q) mix(qi);
  return h;
}

std::vector<uint64_t> default_q_primes(uint32_t n, uint64_t t) {
  // Word primes below 2^31 keep every modulus eligible for the vectorized
  // kernels. Wide plaintext moduli need more noise headroom, hence a longer
  // chain; the 128-bit ceiling at n = 8192 (218 bits) admits both choices.
  int bits = n >= 4096 ? 31 : 30;
  size_t count;
  if (n >= 4096) {
    count = t >= (uint64_t(1) << 25) ? 6 : 4;
  } else {
    // Small rings are test territory with no security ceiling, so size the
    // chain for two plaintext multiplies with margin even at wide t.
    int tb = ring::Modulus(t).bits();
    count = static_cast<size_t>(7 * tb / 2 + 50 + 29) / 30;
    if (count < 2) count = 2;
  }
  auto primes = ring::find_ntt_primes(bits, n, count, {t});
  std::vector<uint64_t> out;
  out.reserve(primes.size());
  for (const auto& p : primes) out.push_back(p.value());
  return out;
}

EncryptionParams make_params(uint32_t n, uint64_t t, int security_level) {
  EncryptionParams p;
  p.n = n;
  p.t = t;
  p.q = default_q_primes(n, t);
  p.security_level = security_level;
  p.validate();
  return p;
}

}  // namespace hei::bfv
