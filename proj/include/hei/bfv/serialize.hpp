// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "hei/bfv/ciphertext.hpp"
#include "hei/bfv/context.hpp"
#include "hei/bfv/keys.hpp"

namespace hei::bfv {

// Binary container for scheme objects:
//   "HECT" | version u16 | params_hash u64 | part_count u32 | kind u8 | body
// The body is a sequence of polynomials, each [form u8 | n x u64 LE], per RNS
// prime. Ciphertexts and keys other than galois keys are written in canonical
// coefficient form; galois keys are eval-form by construction (their Shoup
// constants are rebuilt on load). Loaders check magic, version, kind and the
// params hash and throw CodecError on any mismatch.

enum class ObjectKind : uint8_t {
  secret_key = 1,
  public_key = 2,
  galois_keys = 3,
  plaintext = 4,
  ciphertext = 5,
};

void save_ciphertext(std::ostream& os, const Ciphertext& ct,
                     const BfvContext& ctx);
Ciphertext load_ciphertext(std::istream& is, const BfvContext& ctx);

void save_plaintext(std::ostream& os, const Plaintext& pt,
                    const BfvContext& ctx);
Plaintext load_plaintext(std::istream& is, const BfvContext& ctx);

void save_secret_key(std::ostream& os, const SecretKey& sk,
                     const BfvContext& ctx);
SecretKey load_secret_key(std::istream& is, const BfvContext& ctx);

void save_public_key(std::ostream& os, const PublicKey& pk,
                     const BfvContext& ctx);
PublicKey load_public_key(std::istream& is, const BfvContext& ctx);

void save_galois_keys(std::ostream& os, const GaloisKeySet& gk,
                      const BfvContext& ctx);
GaloisKeySet load_galois_keys(std::istream& is, const BfvContext& ctx);

// In-memory convenience wrappers used by the wire protocol.
template <typename Obj, typename SaveFn>
std::string to_bytes(const Obj& o, const BfvContext& ctx, SaveFn fn) {
  std::ostringstream os(std::ios::binary);
  fn(os, o, ctx);
  return std::move(os).str();
}

}  // namespace hei::bfv
