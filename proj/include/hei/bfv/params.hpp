// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

namespace hei::bfv {

// Parameter set for one plaintext-modulus branch: ring degree n, plaintext
// modulus t, ciphertext modulus q = product of NTT-friendly word primes.
struct EncryptionParams {
  uint32_t n = 0;
  uint64_t t = 0;
  std::vector<uint64_t> q;
  // 0 disables the size cap (test parameters); 128 enforces the standard
  // ceiling on log2(q) for a ternary secret at this n.
  int security_level = 0;

  void validate() const;       // throws ParamError with a specific message
  int total_q_bits() const;
  uint64_t hash() const;       // folded into every serialized object
};

// Ceiling on log2(q) for 128-bit classical security, ternary secret.
int max_q_bits_128(uint32_t n);

// Deterministic default modulus chain for (n, t): both sides of a connection
// derive the same primes from the public (n, t, security) triple.
std::vector<uint64_t> default_q_primes(uint32_t n, uint64_t t);

EncryptionParams make_params(uint32_t n, uint64_t t, int security_level);

}  // namespace hei::bfv
