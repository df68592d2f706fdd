// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

namespace hei::fpcrt {

// Fixed-point exponents: inputs carry s_x fractional bits, weights s_w, so a
// dot product (and any bias folded into it) lives at scale 2^(s_x+s_w).
struct ScalingConfig {
  uint32_t s_x = 6;
  uint32_t s_w = 14;
  // Inputs are promised to satisfy |x| < 2^input_int_bits before scaling.
  uint32_t input_int_bits = 8;

  uint32_t output_scale() const { return s_x + s_w; }
};

// Coprime plaintext moduli. One accumulator value v is carried as the pair
// (v mod t0, v mod t1); together they cover ~46.8 bits where one word-size
// prime tops out near 30.
struct PlainModuliPair {
  uint64_t t0 = 1073872897;
  uint64_t t1 = 114689;

  unsigned __int128 product() const {
    return static_cast<unsigned __int128>(t0) * t1;
  }
  // Largest magnitude the centered representation can hold.
  int64_t max_centered() const {
    return static_cast<int64_t>((product() - 1) / 2);
  }
  int capacity_bits() const;  // floor(log2(t0*t1))
};

struct SignedResidues {
  uint64_t r0 = 0, r1 = 0;
};

// x * 2^exponent, rounded half away from zero. RangeError once the result
// leaves the centered range of the default modulus pair (or is not finite).
int64_t scale_value(double x, uint32_t exponent);

// v / 2^(s_x + s_w) as a double.
double descale_output(int64_t v, const ScalingConfig& cfg);

// Magnitude bits of a worst-case f-term dot product of scaled values:
// input_int_bits + s_x + s_w + ceil(log2 f). f >= 1.
int required_output_bits(uint64_t f, const ScalingConfig& cfg);

struct CapacityReport {
  int required_bits = 0;  // magnitude bits the computation needs
  int capacity_bits = 0;  // floor(log2 of the product of the moduli)
  int deficit_bits = 0;   // how many bits are missing; 0 when ok
  bool ok = false;
};

// ok iff required_bits plus the sign bit fit under the moduli product.
// Accepts a single modulus or the pair.
CapacityReport capacity_check(uint64_t f, const ScalingConfig& cfg,
                              std::span<const uint64_t> moduli);

// Centered CRT: |v| <= max_centered() maps to and from residue pairs.
SignedResidues crt_split(int64_t v, const PlainModuliPair& mods);
int64_t crt_recombine(const SignedResidues& r, const PlainModuliPair& mods);

}  // namespace hei::fpcrt
