// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "hei/ring/ntt_tables.hpp"

namespace hei::ring {

enum class PolyForm : uint8_t { coeff = 0, eval = 1 };

// Residue polynomial in Z_q[x]/(x^n + 1), either in coefficient form or in
// NTT (evaluation) form. One modulus per instance; an RNS object is a vector
// of these.
struct RingPoly {
  uint32_t n = 0;
  uint64_t q = 0;
  PolyForm form = PolyForm::coeff;
  std::vector<uint64_t> c;

  static RingPoly zero(uint32_t n, uint64_t q,
                       PolyForm form = PolyForm::coeff) {
    RingPoly p;
    p.n = n;
    p.q = q;
    p.form = form;
    p.c.assign(n, 0);
    return p;
  }
};

// Eval-form polynomial with per-element Shoup constants; the fast operand of
// pointwise products.
struct PreparedPoly {
  uint32_t n = 0;
  uint64_t q = 0;
  std::vector<uint64_t> vals, shoup;
};

void add_inplace(RingPoly& a, const RingPoly& b);
void sub_inplace(RingPoly& a, const RingPoly& b);
void negate_inplace(RingPoly& a);

void ntt_forward(RingPoly& p, const NttTables& tables);   // coeff -> eval
void ntt_inverse(RingPoly& p, const NttTables& tables);   // eval -> coeff

PreparedPoly prepare(const RingPoly& eval_form);
// a[i] = a[i] * b[i] mod q; a in eval form.
void mul_prepared_inplace(RingPoly& a, const PreparedPoly& b);
// a[i] = a[i] * b[i] with no precomputation; forms must match (cold paths).
void mul_pointwise_inplace(RingPoly& a, const RingPoly& b);
void mul_scalar_inplace(RingPoly& a, uint64_t w);
// a[i] += x[i] * b[i]; a, x in eval form.
void fma_prepared_inplace(RingPoly& a, const RingPoly& x,
                          const PreparedPoly& b);

// Full negacyclic product via NTT; inputs in coefficient form, untouched.
RingPoly negacyclic_mul(const RingPoly& a, const RingPoly& b,
                        const NttTables& tables);

// x^i -> x^{i*g mod 2n} with x^n = -1 folding; coefficient form in and out.
// g must be odd.
RingPoly automorphism_coeff(const RingPoly& p, uint64_t galois_elt);

// Slot permutation implementing the same map on eval form; perm comes from
// galois_eval_permutation.
RingPoly automorphism_eval(const RingPoly& p,
                           const std::vector<uint32_t>& perm);
std::vector<uint32_t> galois_eval_permutation(uint32_t n, uint64_t galois_elt);

}  // namespace hei::ring
