// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <span>
#include <vector>

#include "hei/bfv/ciphertext.hpp"
#include "hei/bfv/keys.hpp"
#include "hei/bfv/params.hpp"
#include "hei/ring/ntt_tables.hpp"
#include "hei/util/rng.hpp"

namespace hei::bfv {

// All derived constants for one parameter set, plus the scheme operations.
// Instances are immutable after construction and safe to share across
// threads. Key material is passed in explicitly: holding a context conveys
// no decryption capability.
class BfvContext {
 public:
  explicit BfvContext(EncryptionParams params);
  ~BfvContext();

  BfvContext(const BfvContext&) = delete;
  BfvContext& operator=(const BfvContext&) = delete;

  const EncryptionParams& params() const { return params_; }
  uint32_t n() const { return params_.n; }
  uint64_t t() const { return params_.t; }
  size_t num_primes() const { return params_.q.size(); }
  uint64_t hash() const { return hash_; }

  // Slot batching. encode pads short inputs with zero; entries must be < t.
  Plaintext encode_slots(std::span<const uint64_t> slots) const;
  std::vector<uint64_t> decode_slots(const Plaintext& pt) const;
  EvalPlain prepare_plain(const Plaintext& pt) const;
  // Same slot value everywhere; built directly, no transforms involved.
  EvalPlain prepare_constant(uint64_t value) const;

  KeyPair keygen(util::Prng& rng) const;
  PreparedPublicKey prepare_public(const PublicKey& pk) const;
  // Keys for steps 1, 2, 4, ..., n/4 and for the half-swap automorphism.
  GaloisKeySet make_galois_keys(const SecretKey& sk, util::Prng& rng) const;
  std::vector<uint32_t> galois_steps() const;

  Ciphertext encrypt(const Plaintext& pt, const PreparedPublicKey& pk,
                     util::Prng& rng) const;        // coefficient form out
  Ciphertext encrypt_eval(const Plaintext& pt, const PreparedPublicKey& pk,
                          util::Prng& rng) const;   // eval form out
  // Throws NoiseError when the invariant noise budget is exhausted.
  Plaintext decrypt(const Ciphertext& ct, const SecretKey& sk) const;
  // Bits of invariant noise budget left; 0 means decryption is unreliable.
  int noise_budget(const Ciphertext& ct, const SecretKey& sk) const;

  void add_inplace(Ciphertext& a, const Ciphertext& b) const;
  void add_plain_inplace(Ciphertext& ct, const Plaintext& pt) const;
  // ct *= pt pointwise in the slot domain; ct is switched to eval form.
  void mul_plain_inplace(Ciphertext& ct, const EvalPlain& pt) const;

  uint64_t galois_elt_for_step(uint32_t pow2_step) const;
  uint64_t galois_elt_swap() const { return 2 * static_cast<uint64_t>(n()) - 1; }
  // Automorphism + key switch; output form matches input form.
  Ciphertext apply_galois(const Ciphertext& ct, uint64_t galois_elt,
                          const GaloisKeySet& gks) const;

  void to_eval(Ciphertext& ct) const;
  void to_coeff(Ciphertext& ct) const;

  const ring::NttTables& q_tables(size_t i) const { return *q_tables_[i]; }
  const ring::NttTables& plain_tables() const { return *t_tables_; }
  const std::vector<uint32_t>& slot_index_map() const { return index_map_; }

 private:
  struct BigPrecomp;  // CRT reconstruction constants (multiprecision)

  Ciphertext encrypt_parts(const Plaintext& pt, const PreparedPublicKey& pk,
                           util::Prng& rng, bool eval_out) const;
  struct DecryptResult {
    Plaintext pt;
    int budget;
  };
  DecryptResult decrypt_core(const Ciphertext& ct, const SecretKey& sk) const;
  ring::RingPoly delta_times(const ring::RingPoly& m, size_t prime) const;
  std::vector<ring::PreparedPoly> prepared_secret(const SecretKey& sk) const;
  void check_hash(uint64_t h, const char* what) const;

  EncryptionParams params_;
  uint64_t hash_ = 0;
  std::vector<std::unique_ptr<ring::NttTables>> q_tables_;
  std::unique_ptr<ring::NttTables> t_tables_;
  std::vector<uint64_t> delta_, delta_shoup_;  // floor(q/t) mod q_i
  std::vector<uint32_t> index_map_;
  std::map<uint64_t, std::vector<uint32_t>> eval_perms_;
  std::unique_ptr<const BigPrecomp> big_;
};

}  // namespace hei::bfv
