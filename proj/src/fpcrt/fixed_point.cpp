// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/fpcrt/fixed_point.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "hei/kernels/modarith.hpp"
#include "hei/util/errors.hpp"

namespace hei::fpcrt {

namespace {

int floor_log2_u128(unsigned __int128 v) {
  int b = -1;
  while (v) {
    ++b;
    v >>= 1;
  }
  return b;
}

uint64_t centered_residue(int64_t v, uint64_t t) {
  __int128 r = static_cast<__int128>(v) % static_cast<__int128>(t);
  if (r < 0) r += t;
  return static_cast<uint64_t>(r);
}

}  // namespace

int PlainModuliPair::capacity_bits() const { return floor_log2_u128(product()); }

int64_t scale_value(double x, uint32_t exponent) {
  if (!std::isfinite(x)) throw RangeError("scale_value: non-finite input");
  if (exponent > 62) throw ParamError("scale_value: exponent too large");
  double scaled = std::ldexp(x, static_cast<int>(exponent));
  PlainModuliPair mods;
  double limit = static_cast<double>(mods.max_centered());
  if (!(std::fabs(scaled) <= limit))
    throw RangeError("scale_value: " + std::to_string(x) + " * 2^" +
                     std::to_string(exponent) +
                     " exceeds the plaintext capacity");
  return std::llround(scaled);  // llround is half-away-from-zero
}

double descale_output(int64_t v, const ScalingConfig& cfg) {
  return std::ldexp(static_cast<double>(v),
                    -static_cast<int>(cfg.output_scale()));
}

int required_output_bits(uint64_t f, const ScalingConfig& cfg) {
  if (f == 0) throw ParamError("required_output_bits: empty dot product");
  int log_f = std::bit_width(f - 1);  // ceil(log2 f), 0 at f=1
  return static_cast<int>(cfg.input_int_bits + cfg.s_x + cfg.s_w) + log_f;
}

CapacityReport capacity_check(uint64_t f, const ScalingConfig& cfg,
                              std::span<const uint64_t> moduli) {
  if (moduli.empty()) throw ParamError("capacity_check: no moduli");
  unsigned __int128 prod = 1;
  for (uint64_t t : moduli) {
    if (t < 2) throw ParamError("capacity_check: modulus < 2");
    prod *= t;
  }
  CapacityReport rep;
  rep.required_bits = required_output_bits(f, cfg);
  rep.capacity_bits = floor_log2_u128(prod);
  // One extra bit pays for the sign in the centered representation.
  int need = rep.required_bits + 1;
  rep.ok = need <= rep.capacity_bits;
  rep.deficit_bits = rep.ok ? 0 : need - rep.capacity_bits;
  return rep;
}

SignedResidues crt_split(int64_t v, const PlainModuliPair& mods) {
  if (std::gcd(mods.t0, mods.t1) != 1)
    throw ParamError("crt_split: moduli are not coprime");
  int64_t lim = mods.max_centered();
  if (v > lim || v < -lim)
    throw RangeError("crt_split: |" + std::to_string(v) +
                     "| does not fit the centered range");
  return {centered_residue(v, mods.t0), centered_residue(v, mods.t1)};
}

int64_t crt_recombine(const SignedResidues& r, const PlainModuliPair& mods) {
  if (r.r0 >= mods.t0 || r.r1 >= mods.t1)
    throw RangeError("crt_recombine: residue out of range");
  if (std::gcd(mods.t0, mods.t1) != 1)
    throw ParamError("crt_recombine: moduli are not coprime");
  // Garner: v = r0 + t0 * ((r1 - r0) * t0^{-1} mod t1), then center.
  uint64_t t0_mod_t1 = mods.t0 % mods.t1;
  uint64_t inv = kernels::inv_mod(t0_mod_t1, mods.t1);
  uint64_t diff = (r.r1 + mods.t1 - r.r0 % mods.t1) % mods.t1;
  uint64_t k = kernels::mul_mod_u128(diff, inv, mods.t1);
  unsigned __int128 v = static_cast<unsigned __int128>(mods.t0) * k + r.r0;
  unsigned __int128 prod = mods.product();
  __int128 sv = static_cast<__int128>(v);
  if (v > (prod - 1) / 2) sv -= static_cast<__int128>(prod);
  return static_cast<int64_t>(sv);
}

}  // namespace hei::fpcrt
