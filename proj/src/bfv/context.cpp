// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/bfv/context.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

#include "hei/kernels/modarith.hpp"
#include "hei/kernels/modops.hpp"
#include "hei/ring/sampling.hpp"
#include "hei/util/bits.hpp"
#include "hei/util/errors.hpp"

namespace hei::bfv {

using boost::multiprecision::cpp_int;

struct BfvContext::BigPrecomp {
  cpp_int Q;
  cpp_int Q_half;
  std::vector<cpp_int> Q_punct;  // Q / q_i
  std::vector<uint64_t> y;       // (Q / q_i)^{-1} mod q_i
  int q_msb = 0;
};

BfvContext::BfvContext(EncryptionParams params) : params_(std::move(params)) {
  params_.validate();
  hash_ = params_.hash();

  t_tables_ = std::make_unique<ring::NttTables>(params_.n, params_.t);
  for (uint64_t qi : params_.q)
    q_tables_.push_back(std::make_unique<ring::NttTables>(params_.n, qi));

  auto big = std::make_unique<BigPrecomp>();
  big->Q = 1;
  for (uint64_t qi : params_.q) big->Q *= qi;
  big->Q_half = big->Q >> 1;
  cpp_int delta_big = big->Q / params_.t;
  for (uint64_t qi : params_.q) {
    big->Q_punct.push_back(big->Q / qi);
    uint64_t punct_mod = static_cast<uint64_t>(big->Q_punct.back() % qi);
    big->y.push_back(kernels::inv_mod(punct_mod, qi));
    delta_.push_back(static_cast<uint64_t>(delta_big % qi));
    delta_shoup_.push_back(kernels::shoup_precompute(delta_.back(), qi));
  }
  big->q_msb = static_cast<int>(boost::multiprecision::msb(big->Q));
  big_ = std::move(big);

  // Slot order: generator 3 walks the odd powers of the 2n-th root; half the
  // orbit lands in each hyperplane, giving the 2 x (n/2) slot grid.
  const uint32_t n = params_.n;
  const uint32_t logn = util::log2_exact(n);
  const uint64_t m = 2 * static_cast<uint64_t>(n);
  index_map_.resize(n);
  uint64_t pos = 1;
  for (uint32_t i = 0; i < n / 2; ++i) {
    uint32_t index1 = static_cast<uint32_t>((pos - 1) >> 1);
    uint32_t index2 = static_cast<uint32_t>((m - pos - 1) >> 1);
    index_map_[i] = util::reverse_bits(index1, logn);
    index_map_[i + n / 2] = util::reverse_bits(index2, logn);
    pos = (pos * 3) % m;
  }

  for (uint32_t step : galois_steps()) {
    uint64_t elt = galois_elt_for_step(step);
    eval_perms_.emplace(elt, ring::galois_eval_permutation(n, elt));
  }
  eval_perms_.emplace(galois_elt_swap(),
                      ring::galois_eval_permutation(n, galois_elt_swap()));
}

BfvContext::~BfvContext() = default;

void BfvContext::check_hash(uint64_t h, const char* what) const {
  if (h != hash_)
    throw ParamError(std::string(what) + ": parameter set mismatch");
}

Plaintext BfvContext::encode_slots(std::span<const uint64_t> slots) const {
  if (slots.size() > params_.n)
    throw ParamError("encode_slots: more values than slots");
  ring::RingPoly buf = ring::RingPoly::zero(params_.n, params_.t,
                                            ring::PolyForm::eval);
  for (size_t i = 0; i < slots.size(); ++i) {
    if (slots[i] >= params_.t)
      throw RangeError("encode_slots: slot " + std::to_string(i) +
                       " value not reduced mod t");
    buf.c[index_map_[i]] = slots[i];
  }
  ring::ntt_inverse(buf, *t_tables_);
  return Plaintext{std::move(buf), hash_};
}

std::vector<uint64_t> BfvContext::decode_slots(const Plaintext& pt) const {
  check_hash(pt.params_hash, "decode_slots");
  ring::RingPoly buf = pt.poly;
  if (buf.form == ring::PolyForm::coeff) ring::ntt_forward(buf, *t_tables_);
  std::vector<uint64_t> out(params_.n);
  for (uint32_t i = 0; i < params_.n; ++i) out[i] = buf.c[index_map_[i]];
  return out;
}

EvalPlain BfvContext::prepare_plain(const Plaintext& pt) const {
  check_hash(pt.params_hash, "prepare_plain");
  if (pt.poly.form != ring::PolyForm::coeff)
    throw ParamError("prepare_plain: plaintext must be in coefficient form");
  EvalPlain out;
  out.params_hash = hash_;
  for (size_t i = 0; i < num_primes(); ++i) {
    const uint64_t qi = params_.q[i];
    ring::RingPoly lifted = ring::RingPoly::zero(params_.n, qi);
    for (uint32_t j = 0; j < params_.n; ++j) lifted.c[j] = pt.poly.c[j] % qi;
    ring::ntt_forward(lifted, *q_tables_[i]);
    out.primes.push_back(ring::prepare(lifted));
  }
  return out;
}

EvalPlain BfvContext::prepare_constant(uint64_t value) const {
  if (value >= params_.t)
    throw RangeError("prepare_constant: value not reduced mod t");
  // A constant polynomial evaluates to the same value in every slot, so the
  // NTT per prime is just replication.
  EvalPlain out;
  out.params_hash = hash_;
  for (size_t i = 0; i < num_primes(); ++i) {
    const uint64_t qi = params_.q[i];
    ring::PreparedPoly p;
    p.n = params_.n;
    p.q = qi;
    p.vals.assign(params_.n, value);
    p.shoup.assign(params_.n, kernels::shoup_precompute(value, qi));
    out.primes.push_back(std::move(p));
  }
  return out;
}

std::vector<ring::PreparedPoly> BfvContext::prepared_secret(
    const SecretKey& sk) const {
  if (sk.params_hash != hash_) throw KeyError("secret key: parameter mismatch");
  if (sk.s.size() != params_.n) throw KeyError("secret key: wrong size");
  std::vector<ring::PreparedPoly> out;
  for (size_t i = 0; i < num_primes(); ++i) {
    ring::RingPoly si = ring::lift_signed(sk.s, params_.n, params_.q[i]);
    ring::ntt_forward(si, *q_tables_[i]);
    out.push_back(ring::prepare(si));
  }
  return out;
}

KeyPair BfvContext::keygen(util::Prng& rng) const {
  KeyPair kp;
  kp.secret.s = ring::sample_ternary(params_.n, rng);
  kp.secret.params_hash = hash_;
  auto s_prep = prepared_secret(kp.secret);
  auto e = ring::sample_gaussian(params_.n, ring::kNoiseSigma, rng);
  kp.pub.params_hash = hash_;
  for (size_t i = 0; i < num_primes(); ++i) {
    const uint64_t qi = params_.q[i];
    ring::RingPoly a = ring::sample_uniform(params_.n, qi, rng);
    ring::RingPoly as = a;
    ring::ntt_forward(as, *q_tables_[i]);
    ring::mul_prepared_inplace(as, s_prep[i]);
    ring::ntt_inverse(as, *q_tables_[i]);
    ring::RingPoly ei = ring::lift_signed(e, params_.n, qi);
    ring::add_inplace(as, ei);
    ring::negate_inplace(as);
    kp.pub.p0.push_back(std::move(as));
    kp.pub.p1.push_back(std::move(a));
  }
  return kp;
}

PreparedPublicKey BfvContext::prepare_public(const PublicKey& pk) const {
  if (pk.params_hash != hash_) throw KeyError("public key: parameter mismatch");
  PreparedPublicKey out;
  out.params_hash = hash_;
  for (size_t i = 0; i < num_primes(); ++i) {
    ring::RingPoly a = pk.p0[i], b = pk.p1[i];
    ring::ntt_forward(a, *q_tables_[i]);
    ring::ntt_forward(b, *q_tables_[i]);
    out.p0.push_back(ring::prepare(a));
    out.p1.push_back(ring::prepare(b));
  }
  return out;
}

std::vector<uint32_t> BfvContext::galois_steps() const {
  std::vector<uint32_t> steps;
  for (uint32_t s = 1; s <= params_.n / 4; s <<= 1) steps.push_back(s);
  return steps;
}

uint64_t BfvContext::galois_elt_for_step(uint32_t pow2_step) const {
  if (pow2_step == 0 || pow2_step >= params_.n / 2)
    throw ParamError("rotation step out of range");
  return kernels::pow_mod(3, pow2_step, 2 * static_cast<uint64_t>(params_.n));
}

GaloisKeySet BfvContext::make_galois_keys(const SecretKey& sk,
                                          util::Prng& rng) const {
  auto s_prep = prepared_secret(sk);
  const uint32_t n = params_.n;
  const size_t L = num_primes();
  GaloisKeySet out;
  out.params_hash = hash_;

  std::vector<uint64_t> elts;
  for (uint32_t step : galois_steps()) elts.push_back(galois_elt_for_step(step));
  elts.push_back(galois_elt_swap());

  for (uint64_t elt : elts) {
    // sigma_g(s) over the integers; entries stay in {-1, 0, 1}.
    std::vector<int8_t> sg(n, 0);
    const uint64_t two_n = 2 * static_cast<uint64_t>(n);
    for (uint32_t j = 0; j < n; ++j) {
      uint64_t tgt = (static_cast<uint64_t>(j) * elt) % two_n;
      if (tgt < n)
        sg[tgt] = sk.s[j];
      else
        sg[tgt - n] = static_cast<int8_t>(-sk.s[j]);
    }
    GaloisKey key;
    key.galois_elt = elt;
    key.rows.resize(L);
    for (size_t l = 0; l < L; ++l) {
      auto el = ring::sample_gaussian(n, ring::kNoiseSigma, rng);
      for (size_t i = 0; i < L; ++i) {
        const uint64_t qi = params_.q[i];
        ring::RingPoly a = ring::sample_uniform(n, qi, rng);
        a.form = ring::PolyForm::eval;  // uniform in either domain
        ring::RingPoly b = a;
        ring::mul_prepared_inplace(b, s_prep[i]);
        ring::RingPoly ei = ring::lift_signed(el, n, qi);
        ring::ntt_forward(ei, *q_tables_[i]);
        ring::add_inplace(b, ei);
        ring::negate_inplace(b);
        if (i == l) {
          ring::RingPoly w = ring::lift_signed(sg, n, qi);
          ring::ntt_forward(w, *q_tables_[i]);
          ring::add_inplace(b, w);
        }
        key.rows[l][0].push_back(ring::prepare(b));
        key.rows[l][1].push_back(ring::prepare(a));
      }
    }
    out.keys.emplace(elt, std::move(key));
  }
  return out;
}

ring::RingPoly BfvContext::delta_times(const ring::RingPoly& m,
                                       size_t prime) const {
  const uint64_t qi = params_.q[prime];
  ring::RingPoly out = ring::RingPoly::zero(params_.n, qi);
  for (uint32_t j = 0; j < params_.n; ++j)
    out.c[j] = kernels::shoup_mul(m.c[j], delta_[prime], delta_shoup_[prime], qi);
  return out;
}

Ciphertext BfvContext::encrypt_parts(const Plaintext& pt,
                                     const PreparedPublicKey& pk,
                                     util::Prng& rng, bool eval_out) const {
  check_hash(pt.params_hash, "encrypt");
  if (pk.params_hash != hash_) throw KeyError("encrypt: public key mismatch");
  if (pt.poly.form != ring::PolyForm::coeff)
    throw ParamError("encrypt: plaintext must be in coefficient form");

  auto u = ring::sample_ternary(params_.n, rng);
  auto e0 = ring::sample_gaussian(params_.n, ring::kNoiseSigma, rng);
  auto e1 = ring::sample_gaussian(params_.n, ring::kNoiseSigma, rng);

  Ciphertext ct;
  ct.params_hash = hash_;
  for (size_t i = 0; i < num_primes(); ++i) {
    const uint64_t qi = params_.q[i];
    ring::RingPoly ui = ring::lift_signed(u, params_.n, qi);
    ring::ntt_forward(ui, *q_tables_[i]);
    ring::RingPoly c0 = ui;
    ring::mul_prepared_inplace(c0, pk.p0[i]);
    ring::RingPoly c1 = std::move(ui);
    ring::mul_prepared_inplace(c1, pk.p1[i]);

    ring::RingPoly n0 = ring::lift_signed(e0, params_.n, qi);
    ring::add_inplace(n0, delta_times(pt.poly, i));
    ring::RingPoly n1 = ring::lift_signed(e1, params_.n, qi);
    if (eval_out) {
      ring::ntt_forward(n0, *q_tables_[i]);
      ring::ntt_forward(n1, *q_tables_[i]);
      ring::add_inplace(c0, n0);
      ring::add_inplace(c1, n1);
    } else {
      ring::ntt_inverse(c0, *q_tables_[i]);
      ring::ntt_inverse(c1, *q_tables_[i]);
      ring::add_inplace(c0, n0);
      ring::add_inplace(c1, n1);
    }
    ct.parts[0].push_back(std::move(c0));
    ct.parts[1].push_back(std::move(c1));
  }
  return ct;
}

Ciphertext BfvContext::encrypt(const Plaintext& pt, const PreparedPublicKey& pk,
                               util::Prng& rng) const {
  return encrypt_parts(pt, pk, rng, false);
}

Ciphertext BfvContext::encrypt_eval(const Plaintext& pt,
                                    const PreparedPublicKey& pk,
                                    util::Prng& rng) const {
  return encrypt_parts(pt, pk, rng, true);
}

BfvContext::DecryptResult BfvContext::decrypt_core(const Ciphertext& ct,
                                                   const SecretKey& sk) const {
  check_hash(ct.params_hash, "decrypt");
  auto s_prep = prepared_secret(sk);
  const size_t L = num_primes();
  const uint32_t n = params_.n;

  std::vector<ring::RingPoly> w(L);
  for (size_t i = 0; i < L; ++i) {
    if (ct.form() == ring::PolyForm::eval) {
      ring::RingPoly tmp = ct.parts[1][i];
      ring::mul_prepared_inplace(tmp, s_prep[i]);
      ring::add_inplace(tmp, ct.parts[0][i]);
      ring::ntt_inverse(tmp, *q_tables_[i]);
      w[i] = std::move(tmp);
    } else {
      ring::RingPoly tmp = ct.parts[1][i];
      ring::ntt_forward(tmp, *q_tables_[i]);
      ring::mul_prepared_inplace(tmp, s_prep[i]);
      ring::ntt_inverse(tmp, *q_tables_[i]);
      ring::add_inplace(tmp, ct.parts[0][i]);
      w[i] = std::move(tmp);
    }
  }

  // CRT-reconstruct each coefficient, round t*w/q to the message and keep the
  // largest centered residual as the invariant noise.
  const auto& big = *big_;
  ring::RingPoly m = ring::RingPoly::zero(n, params_.t);
  cpp_int max_r = 0;
  for (uint32_t j = 0; j < n; ++j) {
    cpp_int acc = 0;
    for (size_t i = 0; i < L; ++i) {
      uint64_t c = kernels::mul_mod_u128(w[i].c[j], big.y[i], params_.q[i]);
      acc += big.Q_punct[i] * c;
    }
    while (acc >= big.Q) acc -= big.Q;
    cpp_int z = acc * params_.t;
    cpp_int num = z + big.Q_half;
    cpp_int quot = num / big.Q;
    m.c[j] = static_cast<uint64_t>(quot % params_.t);
    cpp_int r = z - quot * big.Q;  // centered residual in (-q/2, q/2]
    if (r < 0) r = -r;
    if (r > max_r) max_r = r;
  }

  int budget;
  if (max_r == 0) {
    budget = big.q_msb - 1;
  } else {
    budget = big.q_msb - static_cast<int>(boost::multiprecision::msb(max_r << 1));
    if (budget < 0) budget = 0;
  }
  return {Plaintext{std::move(m), hash_}, budget};
}

Plaintext BfvContext::decrypt(const Ciphertext& ct, const SecretKey& sk) const {
  DecryptResult r = decrypt_core(ct, sk);
  if (r.budget <= 0)
    throw NoiseError("decrypt: invariant noise budget exhausted");
  return std::move(r.pt);
}

int BfvContext::noise_budget(const Ciphertext& ct, const SecretKey& sk) const {
  return decrypt_core(ct, sk).budget;
}

void BfvContext::add_inplace(Ciphertext& a, const Ciphertext& b) const {
  check_hash(a.params_hash, "add");
  check_hash(b.params_hash, "add");
  if (a.form() != b.form())
    throw ParamError("add: ciphertext forms differ");
  for (int part = 0; part < 2; ++part)
    for (size_t i = 0; i < num_primes(); ++i)
      ring::add_inplace(a.parts[part][i], b.parts[part][i]);
}

void BfvContext::add_plain_inplace(Ciphertext& ct, const Plaintext& pt) const {
  check_hash(ct.params_hash, "add_plain");
  check_hash(pt.params_hash, "add_plain");
  for (size_t i = 0; i < num_primes(); ++i) {
    ring::RingPoly dm = delta_times(pt.poly, i);
    if (ct.form() == ring::PolyForm::eval)
      ring::ntt_forward(dm, *q_tables_[i]);
    ring::add_inplace(ct.parts[0][i], dm);
  }
}

void BfvContext::mul_plain_inplace(Ciphertext& ct, const EvalPlain& ep) const {
  check_hash(ct.params_hash, "mul_plain");
  check_hash(ep.params_hash, "mul_plain");
  to_eval(ct);
  for (size_t i = 0; i < num_primes(); ++i) {
    ring::mul_prepared_inplace(ct.parts[0][i], ep.primes[i]);
    ring::mul_prepared_inplace(ct.parts[1][i], ep.primes[i]);
  }
}

void BfvContext::to_eval(Ciphertext& ct) const {
  if (ct.form() == ring::PolyForm::eval) return;
  for (int part = 0; part < 2; ++part)
    for (size_t i = 0; i < num_primes(); ++i)
      ring::ntt_forward(ct.parts[part][i], *q_tables_[i]);
}

void BfvContext::to_coeff(Ciphertext& ct) const {
  if (ct.form() == ring::PolyForm::coeff) return;
  for (int part = 0; part < 2; ++part)
    for (size_t i = 0; i < num_primes(); ++i)
      ring::ntt_inverse(ct.parts[part][i], *q_tables_[i]);
}

Ciphertext BfvContext::apply_galois(const Ciphertext& ct, uint64_t galois_elt,
                                    const GaloisKeySet& gks) const {
  check_hash(ct.params_hash, "apply_galois");
  if (gks.params_hash != hash_)
    throw KeyError("apply_galois: galois keys for a different parameter set");
  auto it = gks.keys.find(galois_elt);
  if (it == gks.keys.end())
    throw KeyError("apply_galois: no key for galois element " +
                   std::to_string(galois_elt));
  const GaloisKey& gk = it->second;
  const size_t L = num_primes();
  const uint32_t n = params_.n;
  const bool eval_in = ct.form() == ring::PolyForm::eval;

  // Apply the automorphism, then switch sigma(c1) * sigma(s) back to s by
  // folding its CRT digits with the key rows.
  std::vector<ring::RingPoly> c0_sigma(L), digits(L);
  if (eval_in) {
    std::vector<uint32_t> perm_storage;
    const std::vector<uint32_t>* perm;
    auto pit = eval_perms_.find(galois_elt);
    if (pit != eval_perms_.end()) {
      perm = &pit->second;
    } else {
      perm_storage = ring::galois_eval_permutation(n, galois_elt);
      perm = &perm_storage;
    }
    for (size_t i = 0; i < L; ++i) {
      c0_sigma[i] = ring::automorphism_eval(ct.parts[0][i], *perm);
      digits[i] = ring::automorphism_eval(ct.parts[1][i], *perm);
      ring::ntt_inverse(digits[i], *q_tables_[i]);
    }
  } else {
    for (size_t i = 0; i < L; ++i) {
      c0_sigma[i] = ring::automorphism_coeff(ct.parts[0][i], galois_elt);
      digits[i] = ring::automorphism_coeff(ct.parts[1][i], galois_elt);
    }
  }

  std::vector<ring::RingPoly> acc0, acc1;
  for (size_t i = 0; i < L; ++i) {
    acc0.push_back(ring::RingPoly::zero(n, params_.q[i], ring::PolyForm::eval));
    acc1.push_back(ring::RingPoly::zero(n, params_.q[i], ring::PolyForm::eval));
  }
  for (size_t l = 0; l < L; ++l) {
    const uint64_t ql = params_.q[l];
    for (size_t i = 0; i < L; ++i) {
      const uint64_t qi = params_.q[i];
      ring::RingPoly d = ring::RingPoly::zero(n, qi);
      if (i == l) {
        d.c = digits[l].c;
      } else if (ql < (uint64_t(1) << 32)) {
        kernels::select(qi).reduce_mod_u32(d.c.data(), digits[l].c.data(), n,
                                           qi);
      } else {
        kernels::scalar::reduce_mod_u64(d.c.data(), digits[l].c.data(), n, qi);
      }
      ring::ntt_forward(d, *q_tables_[i]);
      ring::fma_prepared_inplace(acc0[i], d, gk.rows[l][0][i]);
      ring::fma_prepared_inplace(acc1[i], d, gk.rows[l][1][i]);
    }
  }

  Ciphertext out;
  out.params_hash = hash_;
  for (size_t i = 0; i < L; ++i) {
    if (eval_in) {
      ring::add_inplace(acc0[i], c0_sigma[i]);
      out.parts[0].push_back(std::move(acc0[i]));
      out.parts[1].push_back(std::move(acc1[i]));
    } else {
      ring::ntt_inverse(acc0[i], *q_tables_[i]);
      ring::ntt_inverse(acc1[i], *q_tables_[i]);
      ring::add_inplace(acc0[i], c0_sigma[i]);
      out.parts[0].push_back(std::move(acc0[i]));
      out.parts[1].push_back(std::move(acc1[i]));
    }
  }
  return out;
}

}  // namespace hei::bfv
