// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hei::util {

// Seedable PRNG with platform-stable derived draws. std::mt19937_64 output is
// specified by the standard; the distribution helpers below are hand-rolled
// (rejection sampling, Box-Muller) because std::*_distribution results are
// implementation-defined and we want bit-identical streams everywhere.
//
// Research-grade randomness. A hardened deployment should back key and noise
// sampling with an OS CSPRNG instead.
class Prng {
 public:
  explicit Prng(uint64_t seed) : engine_(seed) {}

  static Prng from_entropy() {
    std::random_device rd;
    uint64_t seed = (static_cast<uint64_t>(rd()) << 32) ^ rd();
    return Prng(seed);
  }

  uint64_t next() { return engine_(); }

  // Unbiased uniform draw in [0, bound). bound > 0.
  uint64_t uniform_u64(uint64_t bound) {
    // Rejection sampling over the largest multiple of bound.
    uint64_t limit = bound * (UINT64_MAX / bound);
    uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % bound;
  }

  // Uniform in [0, 1).
  double uniform_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; one spare value is cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform_double();
    } while (u1 <= 0.0);
    u2 = uniform_double();
    double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(6.283185307179586476925286766559 * u2);
    have_spare_ = true;
    return mag * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace hei::util
