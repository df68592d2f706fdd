// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

namespace hei::ring {

// Word-sized modulus with cached width. Construction does not check
// primality; call is_prime() where it matters.
class Modulus {
 public:
  Modulus() = default;
  explicit Modulus(uint64_t value);

  uint64_t value() const { return value_; }
  int bits() const { return bits_; }
  bool is_prime() const;

  bool operator==(const Modulus& o) const { return value_ == o.value_; }

 private:
  uint64_t value_ = 0;
  int bits_ = 0;
};

// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime_u64(uint64_t v);

// `count` distinct primes of the given bit size congruent to 1 mod 2n,
// searched downward from 2^bits, skipping anything in `avoid`. Throws if the
// supply runs out.
std::vector<Modulus> find_ntt_primes(int bits, uint32_t n, size_t count,
                                     const std::vector<uint64_t>& avoid = {});

// Smallest-witness primitive 2n-th root of unity mod prime q (q = 1 mod 2n).
// Deterministic in (n, q) so independently built tables agree.
uint64_t primitive_root_2n(uint32_t n, uint64_t q);

}  // namespace hei::ring
