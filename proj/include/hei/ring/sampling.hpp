// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "hei/ring/poly.hpp"
#include "hei/util/rng.hpp"

namespace hei::ring {

// Uniform residues mod q, coefficient form.
RingPoly sample_uniform(uint32_t n, uint64_t q, util::Prng& rng);

// Small signed polynomials are sampled once over the integers and lifted per
// RNS modulus so the residues stay consistent.
std::vector<int8_t> sample_ternary(uint32_t n, util::Prng& rng);

// Rounded Gaussian, sigma = noise_sigma, clamped to +/- 6 sigma.
std::vector<int32_t> sample_gaussian(uint32_t n, double sigma,
                                     util::Prng& rng);

// Signed integer vector -> residues mod q, coefficient form.
template <typename T>
RingPoly lift_signed(const std::vector<T>& v, uint32_t n, uint64_t q) {
  RingPoly p = RingPoly::zero(n, q, PolyForm::coeff);
  for (uint32_t i = 0; i < n; ++i) {
    int64_t x = static_cast<int64_t>(v[i]);
    p.c[i] = x >= 0 ? static_cast<uint64_t>(x) % q
                    : q - (static_cast<uint64_t>(-x) % q);
    if (p.c[i] == q) p.c[i] = 0;
  }
  return p;
}

inline constexpr double kNoiseSigma = 3.2;

}  // namespace hei::ring
