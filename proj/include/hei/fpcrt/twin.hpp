// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "hei/bfv/backend.hpp"
#include "hei/bfv/context.hpp"
#include "hei/fpcrt/fixed_point.hpp"
#include "hei/util/rng.hpp"

namespace hei::fpcrt {

// One logical encryption domain built from two single-modulus BFV instances.
// Every value is carried as its centered residues mod t0 and mod t1; both
// branches execute the same slot program.
struct TwinParams {
  uint32_t n = 0;
  PlainModuliPair t;
  int security_level = 0;
  ScalingConfig scaling;
};

// Evaluation-size parameters: n=8192 under the 128-bit ceiling.
TwinParams production_params();
// Tiny parameters for fast tests; no security, same code paths.
TwinParams test_params();

struct TwinKeys {
  std::vector<bfv::KeyPair> kp;        // per branch
  std::vector<bfv::GaloisKeySet> gks;  // per branch
};

struct TwinCipher {
  std::vector<bfv::HeCipher> b;
};
struct TwinPlain {
  std::vector<bfv::HePlain> b;
};
struct TwinPrepared {
  std::vector<bfv::HePrepared> b;
};

class TwinBackend;

class TwinContext {
 public:
  explicit TwinContext(const TwinParams& p);

  const TwinParams& params() const { return params_; }
  size_t branches() const { return ctx_.size(); }
  const std::shared_ptr<const bfv::BfvContext>& branch(size_t i) const {
    return ctx_.at(i);
  }

  TwinKeys keygen(util::Prng& rng) const;

  // Holds pk+sk; rotation keys are optional because a client that only
  // encrypts and decrypts never rotates.
  std::unique_ptr<TwinBackend> client_backend(const TwinKeys& keys,
                                              uint64_t seed = 0,
                                              bool with_galois = true) const;
  // Evaluation only: galois keys, no secret material anywhere inside.
  std::unique_ptr<TwinBackend> server_backend(
      std::vector<bfv::GaloisKeySet> gks) const;
  // Plaintext simulator pair with the same moduli and slot geometry.
  std::unique_ptr<TwinBackend> clear_backend() const;

 private:
  TwinParams params_;
  std::vector<std::shared_ptr<const bfv::BfvContext>> ctx_;
};

class TwinBackend {
 public:
  TwinBackend(std::vector<std::shared_ptr<bfv::HeBackend>> backends,
              TwinParams params);

  bfv::BackendKind kind() const { return backends_[0]->kind(); }
  uint32_t slot_count() const { return params_.n; }
  const TwinParams& params() const { return params_; }
  bfv::HeBackend& branch(size_t i) { return *backends_.at(i); }

  // Signed slot values in the centered range of the pair.
  TwinPlain encode_signed(std::span<const int64_t> vals);
  std::vector<int64_t> decode_signed(const TwinPlain& pt);
  TwinPrepared prepare(const TwinPlain& pt);
  // One signed value in every slot, as centered residues per branch.
  TwinPrepared prepare_constant_signed(int64_t v);
  TwinCipher encrypt(const TwinPlain& pt);
  std::vector<int64_t> decrypt_signed(const TwinCipher& ct);
  int noise_budget(const TwinCipher& ct);  // min over branches

  void add_inplace(TwinCipher& a, const TwinCipher& b);
  TwinCipher add_many(std::span<const TwinCipher> cts);
  void add_plain_inplace(TwinCipher& ct, const TwinPlain& pt);
  void mul_plain_inplace(TwinCipher& ct, const TwinPrepared& pt);
  TwinCipher rotate_slots(const TwinCipher& ct, uint32_t step);
  TwinCipher swap_halves(const TwinCipher& ct);
  TwinCipher sum_all_slots(const TwinCipher& ct);

  // Logical counts: both branches run the identical program, so branch 0
  // speaks for the pair.
  bfv::BackendCounters counters() const { return backends_[0]->counters(); }
  void reset_counters();

 private:
  void check_width(size_t w, const char* what) const;

  std::vector<std::shared_ptr<bfv::HeBackend>> backends_;
  TwinParams params_;
};

}  // namespace hei::fpcrt
