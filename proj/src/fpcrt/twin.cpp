// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/fpcrt/twin.hpp"

#include <numeric>
#include <string>

#include "hei/bfv/params.hpp"
#include "hei/util/errors.hpp"

namespace hei::fpcrt {

TwinParams production_params() {
  TwinParams p;
  p.n = 8192;
  p.t = PlainModuliPair{};  // 1073872897 (30 bits) and 114689 (16 bits)
  p.security_level = 128;
  p.scaling = ScalingConfig{};  // s_x=6, s_w=14
  return p;
}

TwinParams test_params() {
  TwinParams p;
  p.n = 32;
  p.t = PlainModuliPair{7681, 12289};
  p.security_level = 0;
  p.scaling = ScalingConfig{3, 4, 4};
  return p;
}

TwinContext::TwinContext(const TwinParams& p) : params_(p) {
  if (std::gcd(p.t.t0, p.t.t1) != 1)
    throw ParamError("twin moduli must be coprime");
  if (p.t.t0 == p.t.t1) throw ParamError("twin moduli must differ");
  for (uint64_t t : {p.t.t0, p.t.t1})
    ctx_.push_back(std::make_shared<const bfv::BfvContext>(
        bfv::make_params(p.n, t, p.security_level)));
}

TwinKeys TwinContext::keygen(util::Prng& rng) const {
  TwinKeys keys;
  for (auto& c : ctx_) {
    keys.kp.push_back(c->keygen(rng));
    keys.gks.push_back(c->make_galois_keys(keys.kp.back().secret, rng));
  }
  return keys;
}

std::unique_ptr<TwinBackend> TwinContext::client_backend(
    const TwinKeys& keys, uint64_t seed, bool with_galois) const {
  if (keys.kp.size() != ctx_.size())
    throw KeyError("client_backend: key count does not match branches");
  std::vector<std::shared_ptr<bfv::HeBackend>> bs;
  for (size_t i = 0; i < ctx_.size(); ++i) {
    bfv::GaloisKeySet gks =
        with_galois ? keys.gks.at(i) : bfv::GaloisKeySet{};
    uint64_t branch_seed = seed == 0 ? 0 : seed + i;
    bs.push_back(std::make_shared<bfv::BfvBackend>(
        ctx_[i], std::move(gks), keys.kp[i].pub, keys.kp[i].secret,
        branch_seed));
  }
  return std::make_unique<TwinBackend>(std::move(bs), params_);
}

std::unique_ptr<TwinBackend> TwinContext::server_backend(
    std::vector<bfv::GaloisKeySet> gks) const {
  if (gks.size() != ctx_.size())
    throw KeyError("server_backend: galois key count does not match branches");
  std::vector<std::shared_ptr<bfv::HeBackend>> bs;
  for (size_t i = 0; i < ctx_.size(); ++i)
    bs.push_back(
        std::make_shared<bfv::BfvBackend>(ctx_[i], std::move(gks[i])));
  return std::make_unique<TwinBackend>(std::move(bs), params_);
}

std::unique_ptr<TwinBackend> TwinContext::clear_backend() const {
  std::vector<std::shared_ptr<bfv::HeBackend>> bs;
  for (uint64_t t : {params_.t.t0, params_.t.t1})
    bs.push_back(std::make_shared<bfv::ClearBackend>(params_.n, t));
  return std::make_unique<TwinBackend>(std::move(bs), params_);
}

TwinBackend::TwinBackend(std::vector<std::shared_ptr<bfv::HeBackend>> backends,
                         TwinParams params)
    : backends_(std::move(backends)), params_(params) {
  if (backends_.size() != 2) throw ParamError("twin backend needs 2 branches");
}

void TwinBackend::check_width(size_t w, const char* what) const {
  if (w != backends_.size())
    throw ParamError(std::string(what) + ": wrong branch count");
}

TwinPlain TwinBackend::encode_signed(std::span<const int64_t> vals) {
  int64_t lim = params_.t.max_centered();
  std::vector<uint64_t> t = {params_.t.t0, params_.t.t1};
  TwinPlain pt;
  for (size_t b = 0; b < backends_.size(); ++b) {
    std::vector<uint64_t> slots(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) {
      if (vals[i] > lim || vals[i] < -lim)
        throw RangeError("encode_signed: value outside the centered range");
      __int128 r = static_cast<__int128>(vals[i]) % static_cast<__int128>(t[b]);
      if (r < 0) r += t[b];
      slots[i] = static_cast<uint64_t>(r);
    }
    pt.b.push_back(backends_[b]->encode(slots));
  }
  return pt;
}

std::vector<int64_t> TwinBackend::decode_signed(const TwinPlain& pt) {
  check_width(pt.b.size(), "decode_signed");
  auto s0 = backends_[0]->decode(pt.b[0]);
  auto s1 = backends_[1]->decode(pt.b[1]);
  std::vector<int64_t> out(s0.size());
  for (size_t i = 0; i < s0.size(); ++i)
    out[i] = crt_recombine({s0[i], s1[i]}, params_.t);
  return out;
}

TwinPrepared TwinBackend::prepare(const TwinPlain& pt) {
  check_width(pt.b.size(), "prepare");
  TwinPrepared out;
  for (size_t b = 0; b < backends_.size(); ++b)
    out.b.push_back(backends_[b]->prepare(pt.b[b]));
  return out;
}

TwinPrepared TwinBackend::prepare_constant_signed(int64_t v) {
  int64_t lim = params_.t.max_centered();
  if (v > lim || v < -lim)
    throw RangeError("prepare_constant_signed: value outside centered range");
  std::vector<uint64_t> t = {params_.t.t0, params_.t.t1};
  TwinPrepared out;
  for (size_t b = 0; b < backends_.size(); ++b) {
    __int128 r = static_cast<__int128>(v) % static_cast<__int128>(t[b]);
    if (r < 0) r += t[b];
    out.b.push_back(backends_[b]->prepare_constant(static_cast<uint64_t>(r)));
  }
  return out;
}

TwinCipher TwinBackend::encrypt(const TwinPlain& pt) {
  check_width(pt.b.size(), "encrypt");
  TwinCipher ct;
  for (size_t b = 0; b < backends_.size(); ++b)
    ct.b.push_back(backends_[b]->encrypt(pt.b[b]));
  return ct;
}

std::vector<int64_t> TwinBackend::decrypt_signed(const TwinCipher& ct) {
  check_width(ct.b.size(), "decrypt_signed");
  TwinPlain pt;
  for (size_t b = 0; b < backends_.size(); ++b)
    pt.b.push_back(backends_[b]->decrypt(ct.b[b]));
  return decode_signed(pt);
}

int TwinBackend::noise_budget(const TwinCipher& ct) {
  check_width(ct.b.size(), "noise_budget");
  int budget = backends_[0]->noise_budget(ct.b[0]);
  for (size_t b = 1; b < backends_.size(); ++b)
    budget = std::min(budget, backends_[b]->noise_budget(ct.b[b]));
  return budget;
}

void TwinBackend::add_inplace(TwinCipher& a, const TwinCipher& b) {
  check_width(a.b.size(), "add_inplace");
  check_width(b.b.size(), "add_inplace");
  for (size_t i = 0; i < backends_.size(); ++i)
    backends_[i]->add_inplace(a.b[i], b.b[i]);
}

TwinCipher TwinBackend::add_many(std::span<const TwinCipher> cts) {
  if (cts.empty()) throw ParamError("add_many: nothing to add");
  TwinCipher acc = cts[0];
  for (size_t k = 1; k < cts.size(); ++k) add_inplace(acc, cts[k]);
  return acc;
}

void TwinBackend::add_plain_inplace(TwinCipher& ct, const TwinPlain& pt) {
  check_width(ct.b.size(), "add_plain_inplace");
  check_width(pt.b.size(), "add_plain_inplace");
  for (size_t i = 0; i < backends_.size(); ++i)
    backends_[i]->add_plain_inplace(ct.b[i], pt.b[i]);
}

void TwinBackend::mul_plain_inplace(TwinCipher& ct, const TwinPrepared& pt) {
  check_width(ct.b.size(), "mul_plain_inplace");
  check_width(pt.b.size(), "mul_plain_inplace");
  for (size_t i = 0; i < backends_.size(); ++i)
    backends_[i]->mul_plain_inplace(ct.b[i], pt.b[i]);
}

TwinCipher TwinBackend::rotate_slots(const TwinCipher& ct, uint32_t step) {
  check_width(ct.b.size(), "rotate_slots");
  TwinCipher out;
  for (size_t i = 0; i < backends_.size(); ++i)
    out.b.push_back(backends_[i]->rotate_slots(ct.b[i], step));
  return out;
}

TwinCipher TwinBackend::swap_halves(const TwinCipher& ct) {
  check_width(ct.b.size(), "swap_halves");
  TwinCipher out;
  for (size_t i = 0; i < backends_.size(); ++i)
    out.b.push_back(backends_[i]->swap_halves(ct.b[i]));
  return out;
}

TwinCipher TwinBackend::sum_all_slots(const TwinCipher& ct) {
  check_width(ct.b.size(), "sum_all_slots");
  TwinCipher out;
  for (size_t i = 0; i < backends_.size(); ++i)
    out.b.push_back(backends_[i]->sum_all_slots(ct.b[i]));
  return out;
}

void TwinBackend::reset_counters() {
  for (auto& b : backends_) b->reset_counters();
}

}  // namespace hei::fpcrt
