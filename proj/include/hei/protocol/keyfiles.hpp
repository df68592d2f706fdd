// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "hei/bfv/keys.hpp"
#include "hei/fpcrt/twin.hpp"

namespace hei::protocol {

// Key material on disk: one file per role, each holding one serialized blob
// per plaintext-modulus branch.
//
// File layout, little-endian:
//   "HEKS" | version u16 | kind u8 (ObjectKind from bfv/serialize.hpp)
//   | branch count u32 | per branch: u64 length + container bytes
//
// The per-branch containers carry the parameter hash, so loading against a
// context with different parameters fails loudly.

inline constexpr uint16_t kKeyFileVersion = 1;
inline constexpr char kSecretKeyFile[] = "secret.key";
inline constexpr char kPublicKeyFile[] = "public.key";
inline constexpr char kGaloisKeyFile[] = "galois.key";

// Writes secret.key, public.key and galois.key into dir (created if needed).
void save_key_files(const std::string& dir, const fpcrt::TwinContext& ctx,
                    const fpcrt::TwinKeys& keys);

// Reads secret + public keys, and the rotation keys too when with_galois is
// set. CodecError on malformed files or parameter mismatch.
fpcrt::TwinKeys load_key_files(const std::string& dir,
                               const fpcrt::TwinContext& ctx,
                               bool with_galois);

// Just the rotation keys, one set per branch; what a transport-only client
// needs for SESSION_INIT.
std::vector<bfv::GaloisKeySet> load_galois_key_file(
    const std::string& path, const fpcrt::TwinContext& ctx);

}  // namespace hei::protocol
