// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/ring/poly.hpp"

#include "hei/kernels/modarith.hpp"
#include "hei/kernels/modops.hpp"
#include "hei/util/bits.hpp"
#include "hei/util/errors.hpp"

namespace hei::ring {

namespace {

void check_compat(const RingPoly& a, const RingPoly& b) {
  if (a.n != b.n || a.q != b.q) throw ParamError("polynomial shape mismatch");
  if (a.form != b.form) throw ParamError("polynomial form mismatch");
}

}  // namespace

void add_inplace(RingPoly& a, const RingPoly& b) {
  check_compat(a, b);
  kernels::select(a.q).add_mod(a.c.data(), a.c.data(), b.c.data(), a.n, a.q);
}

void sub_inplace(RingPoly& a, const RingPoly& b) {
  check_compat(a, b);
  kernels::select(a.q).sub_mod(a.c.data(), a.c.data(), b.c.data(), a.n, a.q);
}

void negate_inplace(RingPoly& a) {
  kernels::select(a.q).neg_mod(a.c.data(), a.c.data(), a.n, a.q);
}

void ntt_forward(RingPoly& p, const NttTables& tables) {
  if (p.form != PolyForm::coeff) throw ParamError("ntt_forward: not coeff form");
  if (p.n != tables.size() || p.q != tables.modulus())
    throw ParamError("ntt_forward: tables mismatch");
  kernels::select(p.q).ntt_forward(p.c.data(), tables.view());
  p.form = PolyForm::eval;
}

void ntt_inverse(RingPoly& p, const NttTables& tables) {
  if (p.form != PolyForm::eval) throw ParamError("ntt_inverse: not eval form");
  if (p.n != tables.size() || p.q != tables.modulus())
    throw ParamError("ntt_inverse: tables mismatch");
  kernels::select(p.q).ntt_inverse(p.c.data(), tables.view());
  p.form = PolyForm::coeff;
}

PreparedPoly prepare(const RingPoly& eval_form) {
  if (eval_form.form != PolyForm::eval)
    throw ParamError("prepare: polynomial must be in eval form");
  PreparedPoly out;
  out.n = eval_form.n;
  out.q = eval_form.q;
  out.vals = eval_form.c;
  out.shoup.resize(eval_form.n);
  for (uint32_t i = 0; i < eval_form.n; ++i)
    out.shoup[i] = kernels::shoup_precompute(out.vals[i], out.q);
  return out;
}

void mul_prepared_inplace(RingPoly& a, const PreparedPoly& b) {
  if (a.form != PolyForm::eval) throw ParamError("mul_prepared: not eval form");
  if (a.n != b.n || a.q != b.q) throw ParamError("mul_prepared: shape mismatch");
  kernels::select(a.q).mul_mod_prepared(a.c.data(), a.c.data(), b.vals.data(),
                                        b.shoup.data(), a.n, a.q);
}

void mul_pointwise_inplace(RingPoly& a, const RingPoly& b) {
  check_compat(a, b);
  kernels::scalar::mul_mod_generic(a.c.data(), a.c.data(), b.c.data(), a.n,
                                   a.q);
}

void mul_scalar_inplace(RingPoly& a, uint64_t w) {
  w %= a.q;
  uint64_t ws = kernels::shoup_precompute(w, a.q);
  kernels::select(a.q).mul_mod_scalar(a.c.data(), a.c.data(), w, ws, a.n, a.q);
}

void fma_prepared_inplace(RingPoly& a, const RingPoly& x,
                          const PreparedPoly& b) {
  if (a.form != PolyForm::eval || x.form != PolyForm::eval)
    throw ParamError("fma_prepared: not eval form");
  if (a.n != b.n || a.q != b.q || x.n != b.n || x.q != b.q)
    throw ParamError("fma_prepared: shape mismatch");
  kernels::select(a.q).fma_mod_prepared(a.c.data(), x.c.data(), b.vals.data(),
                                        b.shoup.data(), a.n, a.q);
}

RingPoly negacyclic_mul(const RingPoly& a, const RingPoly& b,
                        const NttTables& tables) {
  if (a.form != PolyForm::coeff || b.form != PolyForm::coeff)
    throw ParamError("negacyclic_mul: inputs must be coeff form");
  check_compat(a, b);
  RingPoly ea = a, eb = b;
  ntt_forward(ea, tables);
  ntt_forward(eb, tables);
  mul_pointwise_inplace(ea, eb);
  ntt_inverse(ea, tables);
  return ea;
}

RingPoly automorphism_coeff(const RingPoly& p, uint64_t galois_elt) {
  if (p.form != PolyForm::coeff)
    throw ParamError("automorphism_coeff: not coeff form");
  if ((galois_elt & 1) == 0) throw ParamError("galois element must be odd");
  const uint64_t two_n = 2 * static_cast<uint64_t>(p.n);
  RingPoly out = RingPoly::zero(p.n, p.q, PolyForm::coeff);
  for (uint32_t i = 0; i < p.n; ++i) {
    uint64_t tgt = (static_cast<uint64_t>(i) * galois_elt) % two_n;
    if (tgt < p.n) {
      out.c[tgt] = p.c[i];
    } else {
      out.c[tgt - p.n] = kernels::neg_mod_1(p.c[i], p.q);
    }
  }
  return out;
}

std::vector<uint32_t> galois_eval_permutation(uint32_t n, uint64_t galois_elt) {
  // Eval slot i of the forward NTT holds the value at root exponent
  // e_i = 2*bitrev(i) + 1. The automorphism x -> x^g sends the evaluation at
  // e to the evaluation at e*g, so out[i] = in[index_of(e_i * g mod 2n)].
  if ((galois_elt & 1) == 0) throw ParamError("galois element must be odd");
  const uint32_t logn = util::log2_exact(n);
  const uint64_t two_n = 2 * static_cast<uint64_t>(n);
  std::vector<uint32_t> perm(n);
  for (uint32_t i = 0; i < n; ++i) {
    uint64_t e = 2 * static_cast<uint64_t>(util::reverse_bits(i, logn)) + 1;
    uint64_t src_e = (e * galois_elt) % two_n;
    perm[i] = util::reverse_bits(static_cast<uint32_t>((src_e - 1) / 2), logn);
  }
  return perm;
}

RingPoly automorphism_eval(const RingPoly& p,
                           const std::vector<uint32_t>& perm) {
  if (p.form != PolyForm::eval)
    throw ParamError("automorphism_eval: not eval form");
  if (perm.size() != p.n) throw ParamError("automorphism_eval: bad perm size");
  RingPoly out = RingPoly::zero(p.n, p.q, PolyForm::eval);
  for (uint32_t i = 0; i < p.n; ++i) out.c[i] = p.c[perm[i]];
  return out;
}

}  // namespace hei::ring
