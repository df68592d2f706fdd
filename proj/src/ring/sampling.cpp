// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/ring/sampling.hpp"

#include <cmath>

namespace hei::ring {

RingPoly sample_uniform(uint32_t n, uint64_t q, util::Prng& rng) {
  RingPoly p = RingPoly::zero(n, q, PolyForm::coeff);
  for (uint32_t i = 0; i < n; ++i) p.c[i] = rng.uniform_u64(q);
  return p;
}

std::vector<int8_t> sample_ternary(uint32_t n, util::Prng& rng) {
  std::vector<int8_t> v(n);
  for (uint32_t i = 0; i < n; ++i)
    v[i] = static_cast<int8_t>(rng.uniform_u64(3)) - 1;
  return v;
}

std::vector<int32_t> sample_gaussian(uint32_t n, double sigma,
                                     util::Prng& rng) {
  const double bound = 6.0 * sigma;
  std::vector<int32_t> v(n);
  for (uint32_t i = 0; i < n; ++i) {
    double x = rng.gaussian() * sigma;
    if (x > bound) x = bound;
    if (x < -bound) x = -bound;
    v[i] = static_cast<int32_t>(std::llround(x));
  }
  return v;
}

}  // namespace hei::ring
