// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/bfv/backend.hpp"

#include <string>

#include "hei/kernels/modarith.hpp"
#include "hei/util/errors.hpp"

namespace hei::bfv {

// ---- shared, counted operations ----

HeCipher HeBackend::add(const HeCipher& a, const HeCipher& b) {
  HeCipher r = a;
  add_inplace(r, b);
  return r;
}

void HeBackend::add_inplace(HeCipher& a, const HeCipher& b) {
  do_add_inplace(a, b);
  add_count_.fetch_add(1, std::memory_order_relaxed);
}

HeCipher HeBackend::add_many(std::span<const HeCipher> cts) {
  if (cts.empty()) throw ParamError("add_many: empty input");
  HeCipher acc = cts[0];
  for (size_t i = 1; i < cts.size(); ++i) add_inplace(acc, cts[i]);
  return acc;
}

void HeBackend::add_plain_inplace(HeCipher& ct, const HePlain& pt) {
  do_add_plain(ct, pt);
  add_count_.fetch_add(1, std::memory_order_relaxed);
}

void HeBackend::mul_plain_inplace(HeCipher& ct, const HePrepared& pt) {
  do_mul_plain(ct, pt);
  mul_plain_count_.fetch_add(1, std::memory_order_relaxed);
}

HeCipher HeBackend::rotate_slots(const HeCipher& ct, uint32_t step) {
  const uint32_t half = slot_count() / 2;
  if (step == 0 || step >= half)
    throw ParamError("rotate_slots: step must be in [1, n/2)");
  HeCipher cur = ct;
  for (uint32_t bit = 1; bit <= step; bit <<= 1) {
    if (step & bit) {
      cur = do_rotate_pow2(cur, bit);
      rotation_count_.fetch_add(1, std::memory_order_relaxed);
    }
  }
  return cur;
}

HeCipher HeBackend::swap_halves(const HeCipher& ct) {
  HeCipher r = do_swap_halves(ct);
  rotation_count_.fetch_add(1, std::memory_order_relaxed);
  return r;
}

HeCipher HeBackend::sum_all_slots(const HeCipher& ct) {
  HeCipher acc = ct;
  for (uint32_t s = 1; s <= slot_count() / 4; s <<= 1) {
    HeCipher rot = do_rotate_pow2(acc, s);
    rotation_count_.fetch_add(1, std::memory_order_relaxed);
    add_inplace(acc, rot);
  }
  HeCipher sw = swap_halves(acc);
  add_inplace(acc, sw);
  return acc;
}

BackendCounters HeBackend::counters() const {
  return {mul_plain_count_.load(std::memory_order_relaxed),
          rotation_count_.load(std::memory_order_relaxed),
          add_count_.load(std::memory_order_relaxed)};
}

void HeBackend::reset_counters() {
  mul_plain_count_.store(0, std::memory_order_relaxed);
  rotation_count_.store(0, std::memory_order_relaxed);
  add_count_.store(0, std::memory_order_relaxed);
}

// ---- BfvBackend ----

namespace {

const Ciphertext& as_ct(const HeCipher& c) {
  if (!std::holds_alternative<Ciphertext>(c.v))
    throw ParamError("ciphertext handle belongs to a different backend");
  return std::get<Ciphertext>(c.v);
}
Ciphertext& as_ct(HeCipher& c) {
  if (!std::holds_alternative<Ciphertext>(c.v))
    throw ParamError("ciphertext handle belongs to a different backend");
  return std::get<Ciphertext>(c.v);
}
const Plaintext& as_pt(const HePlain& p) {
  if (!std::holds_alternative<Plaintext>(p.v))
    throw ParamError("plaintext handle belongs to a different backend");
  return std::get<Plaintext>(p.v);
}
const EvalPlain& as_ep(const HePrepared& p) {
  if (!std::holds_alternative<EvalPlain>(p.v))
    throw ParamError("prepared handle belongs to a different backend");
  return std::get<EvalPlain>(p.v);
}

}  // namespace

BfvBackend::BfvBackend(std::shared_ptr<const BfvContext> ctx,
                       GaloisKeySet galois)
    : ctx_(std::move(ctx)),
      galois_(std::move(galois)),
      rng_(util::Prng::from_entropy()) {
  if (!galois_.keys.empty() && galois_.params_hash != ctx_->hash())
    throw KeyError("galois keys built for a different parameter set");
}

BfvBackend::BfvBackend(std::shared_ptr<const BfvContext> ctx,
                       GaloisKeySet galois, const PublicKey& pk, SecretKey sk,
                       uint64_t rng_seed)
    : ctx_(std::move(ctx)),
      galois_(std::move(galois)),
      rng_(rng_seed ? util::Prng(rng_seed) : util::Prng::from_entropy()) {
  if (!galois_.keys.empty() && galois_.params_hash != ctx_->hash())
    throw KeyError("galois keys built for a different parameter set");
  pk_ = ctx_->prepare_public(pk);
  has_public_ = true;
  if (sk.params_hash != ctx_->hash())
    throw KeyError("secret key built for a different parameter set");
  sk_ = std::move(sk);
  has_secret_ = true;
}

HePlain BfvBackend::encode(std::span<const uint64_t> slots) {
  return HePlain{ctx_->encode_slots(slots)};
}

std::vector<uint64_t> BfvBackend::decode(const HePlain& pt) {
  return ctx_->decode_slots(as_pt(pt));
}

HePrepared BfvBackend::prepare(const HePlain& pt) {
  return HePrepared{ctx_->prepare_plain(as_pt(pt))};
}

HePrepared BfvBackend::prepare_constant(uint64_t value) {
  return HePrepared{ctx_->prepare_constant(value)};
}

HeCipher BfvBackend::encrypt(const HePlain& pt) {
  if (!has_public_)
    throw KeyError("encrypt: this backend holds no public key");
  return HeCipher{ctx_->encrypt_eval(as_pt(pt), pk_, rng_)};
}

HePlain BfvBackend::decrypt(const HeCipher& ct) {
  if (!has_secret_)
    throw KeyError("decrypt: this backend holds no secret key");
  return HePlain{ctx_->decrypt(as_ct(ct), sk_)};
}

int BfvBackend::noise_budget(const HeCipher& ct) {
  if (!has_secret_)
    throw KeyError("noise_budget: this backend holds no secret key");
  return ctx_->noise_budget(as_ct(ct), sk_);
}

void BfvBackend::do_add_inplace(HeCipher& a, const HeCipher& b) {
  ctx_->add_inplace(as_ct(a), as_ct(b));
}

void BfvBackend::do_add_plain(HeCipher& ct, const HePlain& pt) {
  ctx_->add_plain_inplace(as_ct(ct), as_pt(pt));
}

void BfvBackend::do_mul_plain(HeCipher& ct, const HePrepared& pt) {
  ctx_->mul_plain_inplace(as_ct(ct), as_ep(pt));
}

HeCipher BfvBackend::do_rotate_pow2(const HeCipher& ct, uint32_t pow2_step) {
  uint64_t elt = ctx_->galois_elt_for_step(pow2_step);
  return HeCipher{ctx_->apply_galois(as_ct(ct), elt, galois_)};
}

HeCipher BfvBackend::do_swap_halves(const HeCipher& ct) {
  return HeCipher{ctx_->apply_galois(as_ct(ct), ctx_->galois_elt_swap(), galois_)};
}

// ---- ClearBackend ----

namespace {

const std::vector<uint64_t>& as_slots(const HeCipher& c) {
  if (!std::holds_alternative<std::vector<uint64_t>>(c.v))
    throw ParamError("ciphertext handle belongs to a different backend");
  return std::get<std::vector<uint64_t>>(c.v);
}
std::vector<uint64_t>& as_slots(HeCipher& c) {
  if (!std::holds_alternative<std::vector<uint64_t>>(c.v))
    throw ParamError("ciphertext handle belongs to a different backend");
  return std::get<std::vector<uint64_t>>(c.v);
}
const std::vector<uint64_t>& as_slots(const HePlain& p) {
  if (!std::holds_alternative<std::vector<uint64_t>>(p.v))
    throw ParamError("plaintext handle belongs to a different backend");
  return std::get<std::vector<uint64_t>>(p.v);
}

}  // namespace

ClearBackend::ClearBackend(uint32_t n, uint64_t t) : n_(n), t_(t) {
  if (n < 2 || (n & (n - 1)) != 0)
    throw ParamError("slot count must be a power of two >= 2");
  if (t < 2) throw ParamError("plain modulus must be >= 2");
}

std::vector<uint64_t> ClearBackend::padded(
    std::span<const uint64_t> slots) const {
  if (slots.size() > n_) throw ParamError("encode: more values than slots");
  std::vector<uint64_t> v(n_, 0);
  for (size_t i = 0; i < slots.size(); ++i) {
    if (slots[i] >= t_)
      throw RangeError("encode: slot " + std::to_string(i) +
                       " value not reduced mod t");
    v[i] = slots[i];
  }
  return v;
}

HePlain ClearBackend::encode(std::span<const uint64_t> slots) {
  return HePlain{padded(slots)};
}

std::vector<uint64_t> ClearBackend::decode(const HePlain& pt) {
  return as_slots(pt);
}

HePrepared ClearBackend::prepare(const HePlain& pt) {
  return HePrepared{as_slots(pt)};
}

HePrepared ClearBackend::prepare_constant(uint64_t value) {
  if (value >= t_)
    throw RangeError("prepare_constant: value not reduced mod t");
  return HePrepared{std::vector<uint64_t>(n_, value)};
}

HeCipher ClearBackend::encrypt(const HePlain& pt) {
  return HeCipher{as_slots(pt)};
}

HePlain ClearBackend::decrypt(const HeCipher& ct) {
  return HePlain{as_slots(ct)};
}

int ClearBackend::noise_budget(const HeCipher&) { return kInfiniteBudget; }

void ClearBackend::do_add_inplace(HeCipher& a, const HeCipher& b) {
  auto& x = as_slots(a);
  const auto& y = as_slots(b);
  for (uint32_t i = 0; i < n_; ++i) x[i] = kernels::add_mod_1(x[i], y[i], t_);
}

void ClearBackend::do_add_plain(HeCipher& ct, const HePlain& pt) {
  auto& x = as_slots(ct);
  const auto& y = as_slots(pt);
  for (uint32_t i = 0; i < n_; ++i) x[i] = kernels::add_mod_1(x[i], y[i], t_);
}

void ClearBackend::do_mul_plain(HeCipher& ct, const HePrepared& pt) {
  auto& x = as_slots(ct);
  if (!std::holds_alternative<std::vector<uint64_t>>(pt.v))
    throw ParamError("prepared handle belongs to a different backend");
  const auto& y = std::get<std::vector<uint64_t>>(pt.v);
  for (uint32_t i = 0; i < n_; ++i) x[i] = kernels::mul_mod_u128(x[i], y[i], t_);
}

HeCipher ClearBackend::do_rotate_pow2(const HeCipher& ct, uint32_t step) {
  const auto& x = as_slots(ct);
  const uint32_t half = n_ / 2;
  std::vector<uint64_t> out(n_);
  for (uint32_t i = 0; i < half; ++i) {
    out[i] = x[(i + step) % half];
    out[half + i] = x[half + (i + step) % half];
  }
  return HeCipher{std::move(out)};
}

HeCipher ClearBackend::do_swap_halves(const HeCipher& ct) {
  const auto& x = as_slots(ct);
  const uint32_t half = n_ / 2;
  std::vector<uint64_t> out(n_);
  for (uint32_t i = 0; i < half; ++i) {
    out[i] = x[half + i];
    out[half + i] = x[i];
  }
  return HeCipher{std::move(out)};
}

}  // namespace hei::bfv
