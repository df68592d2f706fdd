// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/ring/ntt_tables.hpp"

#include "hei/kernels/modarith.hpp"
#include "hei/ring/modulus.hpp"
#include "hei/util/bits.hpp"
#include "hei/util/errors.hpp"

namespace hei::ring {

NttTables::NttTables(uint32_t n, uint64_t q) : n_(n), q_(q) {
  if (!util::is_power_of_two(n) || n < 2)
    throw ParamError("NTT size must be a power of two >= 2");
  if (!is_prime_u64(q)) throw ParamError("NTT modulus must be prime");
  psi_ = primitive_root_2n(n, q);

  const uint32_t logn = util::log2_exact(n);
  zetas_.resize(n);
  zetas_shoup_.resize(n);
  inv_zetas_.resize(n);
  inv_zetas_shoup_.resize(n);
  const uint64_t psi_inv = kernels::inv_mod(psi_, q);
  for (uint32_t k = 0; k < n; ++k) {
    uint64_t e = util::reverse_bits(k, logn);
    zetas_[k] = kernels::pow_mod(psi_, e, q);
    inv_zetas_[k] = kernels::pow_mod(psi_inv, e, q);
    zetas_shoup_[k] = kernels::shoup_precompute(zetas_[k], q);
    inv_zetas_shoup_[k] = kernels::shoup_precompute(inv_zetas_[k], q);
  }

  view_.n = n;
  view_.q = q;
  view_.zetas = zetas_.data();
  view_.zetas_shoup = zetas_shoup_.data();
  view_.inv_zetas = inv_zetas_.data();
  view_.inv_zetas_shoup = inv_zetas_shoup_.data();
  view_.inv_n = kernels::inv_mod(n, q);
  view_.inv_n_shoup = kernels::shoup_precompute(view_.inv_n, q);
}

}  // namespace hei::ring
