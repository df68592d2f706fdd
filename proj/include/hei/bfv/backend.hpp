// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "hei/bfv/ciphertext.hpp"
#include "hei/bfv/context.hpp"
#include "hei/bfv/keys.hpp"

namespace hei::bfv {

enum class BackendKind { bfv, clear };

// Logical operation counts, bumped inside the op implementations so callers
// measure what actually ran. Thread-safe.
struct BackendCounters {
  uint64_t mul_plain = 0;
  uint64_t rotation = 0;  // one per applied power-of-two step or half-swap
  uint64_t add = 0;
};

// Handles are value types; the active alternative matches the backend kind.
struct HeCipher {
  std::variant<Ciphertext, std::vector<uint64_t>> v;
};
struct HePlain {
  std::variant<Plaintext, std::vector<uint64_t>> v;
};
struct HePrepared {
  std::variant<EvalPlain, std::vector<uint64_t>> v;
};

// One interface for the real scheme and the plaintext simulator, so every
// evaluation pipeline and its tests can run against both. Rotation helpers
// and sum_all_slots are implemented once, on top of the per-backend
// primitives, which keeps operation counts and slot semantics identical.
class HeBackend {
 public:
  virtual ~HeBackend() = default;

  virtual BackendKind kind() const = 0;
  virtual uint32_t slot_count() const = 0;
  virtual uint64_t plain_modulus() const = 0;

  virtual HePlain encode(std::span<const uint64_t> slots) = 0;
  virtual std::vector<uint64_t> decode(const HePlain& pt) = 0;
  virtual HePrepared prepare(const HePlain& pt) = 0;
  // All-slots-equal plaintext, ready to multiply. Cheaper to build than
  // encode + prepare and used heavily by the sample-batched evaluator.
  virtual HePrepared prepare_constant(uint64_t value) = 0;
  virtual HeCipher encrypt(const HePlain& pt) = 0;
  virtual HePlain decrypt(const HeCipher& ct) = 0;
  virtual int noise_budget(const HeCipher& ct) = 0;

  HeCipher add(const HeCipher& a, const HeCipher& b);
  void add_inplace(HeCipher& a, const HeCipher& b);
  HeCipher add_many(std::span<const HeCipher> cts);
  void add_plain_inplace(HeCipher& ct, const HePlain& pt);
  void mul_plain_inplace(HeCipher& ct, const HePrepared& pt);
  // Cyclic left shift by `step` within each half row; 1 <= step < n/2.
  // Decomposed into power-of-two keyed rotations.
  HeCipher rotate_slots(const HeCipher& ct, uint32_t step);
  HeCipher swap_halves(const HeCipher& ct);
  // Every slot ends up holding the sum of all n slots:
  // log2(n/2) rotations, then one half-swap, with an add after each.
  HeCipher sum_all_slots(const HeCipher& ct);

  BackendCounters counters() const;
  void reset_counters();

 protected:
  virtual void do_add_inplace(HeCipher& a, const HeCipher& b) = 0;
  virtual void do_add_plain(HeCipher& ct, const HePlain& pt) = 0;
  virtual void do_mul_plain(HeCipher& ct, const HePrepared& pt) = 0;
  virtual HeCipher do_rotate_pow2(const HeCipher& ct, uint32_t pow2_step) = 0;
  virtual HeCipher do_swap_halves(const HeCipher& ct) = 0;

 private:
  std::atomic<uint64_t> mul_plain_count_{0};
  std::atomic<uint64_t> rotation_count_{0};
  std::atomic<uint64_t> add_count_{0};
};

// Real scheme. The evaluate-only constructor carries no decryption (or even
// encryption) capability: a server built on it cannot read client data.
class BfvBackend : public HeBackend {
 public:
  // Evaluate-only (server side).
  BfvBackend(std::shared_ptr<const BfvContext> ctx, GaloisKeySet galois);
  // Client side; rng_seed fixes encryption randomness for reproducible runs,
  // 0 draws a fresh seed from the OS.
  BfvBackend(std::shared_ptr<const BfvContext> ctx, GaloisKeySet galois,
             const PublicKey& pk, SecretKey sk, uint64_t rng_seed = 0);

  BackendKind kind() const override { return BackendKind::bfv; }
  uint32_t slot_count() const override { return ctx_->n(); }
  uint64_t plain_modulus() const override { return ctx_->t(); }

  HePlain encode(std::span<const uint64_t> slots) override;
  std::vector<uint64_t> decode(const HePlain& pt) override;
  HePrepared prepare(const HePlain& pt) override;
  HePrepared prepare_constant(uint64_t value) override;
  HeCipher encrypt(const HePlain& pt) override;  // eval-form ciphertext
  HePlain decrypt(const HeCipher& ct) override;
  int noise_budget(const HeCipher& ct) override;

  const BfvContext& context() const { return *ctx_; }
  const GaloisKeySet& galois_keys() const { return galois_; }

 protected:
  void do_add_inplace(HeCipher& a, const HeCipher& b) override;
  void do_add_plain(HeCipher& ct, const HePlain& pt) override;
  void do_mul_plain(HeCipher& ct, const HePrepared& pt) override;
  HeCipher do_rotate_pow2(const HeCipher& ct, uint32_t pow2_step) override;
  HeCipher do_swap_halves(const HeCipher& ct) override;

 private:
  std::shared_ptr<const BfvContext> ctx_;
  GaloisKeySet galois_;
  bool has_public_ = false, has_secret_ = false;
  PreparedPublicKey pk_;
  SecretKey sk_;
  util::Prng rng_;
};

// Plaintext simulator: slot vectors mod t with the same rotation geometry.
// Oracle for correctness tests and fast pipeline dry runs.
class ClearBackend : public HeBackend {
 public:
  ClearBackend(uint32_t n, uint64_t t);

  BackendKind kind() const override { return BackendKind::clear; }
  uint32_t slot_count() const override { return n_; }
  uint64_t plain_modulus() const override { return t_; }

  HePlain encode(std::span<const uint64_t> slots) override;
  std::vector<uint64_t> decode(const HePlain& pt) override;
  HePrepared prepare(const HePlain& pt) override;
  HePrepared prepare_constant(uint64_t value) override;
  HeCipher encrypt(const HePlain& pt) override;
  HePlain decrypt(const HeCipher& ct) override;
  int noise_budget(const HeCipher& ct) override;  // "infinite" sentinel

  static constexpr int kInfiniteBudget = 0x7fffffff;

 protected:
  void do_add_inplace(HeCipher& a, const HeCipher& b) override;
  void do_add_plain(HeCipher& ct, const HePlain& pt) override;
  void do_mul_plain(HeCipher& ct, const HePrepared& pt) override;
  HeCipher do_rotate_pow2(const HeCipher& ct, uint32_t pow2_step) override;
  HeCipher do_swap_halves(const HeCipher& ct) override;

 private:
  std::vector<uint64_t> padded(std::span<const uint64_t> slots) const;
  uint32_t n_;
  uint64_t t_;
};

}  // namespace hei::bfv
