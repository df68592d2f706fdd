// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "hei/ring/poly.hpp"

namespace hei::bfv {

// Ternary secret, stored over the integers; per-modulus forms are derived
// where needed so all residues stay consistent.
struct SecretKey {
  std::vector<int8_t> s;
  uint64_t params_hash = 0;
};

// (p0, p1) = (-(a*s + e), a), coefficient form, one polynomial per RNS prime.
struct PublicKey {
  std::vector<ring::RingPoly> p0, p1;
  uint64_t params_hash = 0;
};

// Key-switching key for one Galois automorphism, RNS-decomposed: row l folds
// the l-th CRT digit. rows[l][part][prime] is kept in eval form with Shoup
// constants, ready for pointwise accumulation.
struct GaloisKey {
  uint64_t galois_elt = 0;
  std::vector<std::array<std::vector<ring::PreparedPoly>, 2>> rows;
};

// Keys for every power-of-two rotation step (1, 2, ..., n/4) plus the
// half-swap element 2n - 1. Arbitrary steps decompose into these.
struct GaloisKeySet {
  std::map<uint64_t, GaloisKey> keys;
  uint64_t params_hash = 0;

  bool has(uint64_t galois_elt) const { return keys.count(galois_elt) != 0; }
};

struct KeyPair {
  SecretKey secret;
  PublicKey pub;
};

// Public key with cached NTT/Shoup form; what encrypt actually consumes.
struct PreparedPublicKey {
  std::vector<ring::PreparedPoly> p0, p1;
  uint64_t params_hash = 0;
};

}  // namespace hei::bfv
