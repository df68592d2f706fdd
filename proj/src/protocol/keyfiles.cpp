// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/protocol/keyfiles.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "hei/bfv/serialize.hpp"
#include "hei/util/errors.hpp"
#include "hei/util/io.hpp"

namespace hei::protocol {

namespace {

constexpr char kMagic[4] = {'H', 'E', 'K', 'S'};

void save_branches(
    const std::string& path, bfv::ObjectKind kind, size_t branches,
    const std::function<std::string(size_t)>& blob_for) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CodecError("cannot write " + path);
  util::write_bytes(os, kMagic, 4);
  util::write_le<uint16_t>(os, kKeyFileVersion);
  util::write_le<uint8_t>(os, static_cast<uint8_t>(kind));
  util::write_le<uint32_t>(os, static_cast<uint32_t>(branches));
  for (size_t b = 0; b < branches; ++b) {
    std::string blob = blob_for(b);
    util::write_le<uint64_t>(os, blob.size());
    util::write_bytes(os, blob.data(), blob.size());
  }
  os.flush();
  if (!os) throw CodecError("write failed for " + path);
}

std::vector<std::string> load_branches(const std::string& path,
                                       bfv::ObjectKind kind,
                                       size_t branches) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CodecError("cannot open " + path);
  char magic[4];
  util::read_bytes(is, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw CodecError(path + ": not a key file");
  if (util::read_le<uint16_t>(is) != kKeyFileVersion)
    throw CodecError(path + ": unsupported key file version");
  if (util::read_le<uint8_t>(is) != static_cast<uint8_t>(kind))
    throw CodecError(path + ": wrong key kind");
  uint32_t count = util::read_le<uint32_t>(is);
  if (count != branches)
    throw CodecError(path + ": branch count does not match the parameters");
  std::vector<std::string> blobs(count);
  for (auto& blob : blobs) {
    uint64_t len = util::read_le<uint64_t>(is);
    if (len > (uint64_t{1} << 32)) throw CodecError(path + ": oversize blob");
    blob.resize(len);
    util::read_bytes(is, blob.data(), len);
  }
  if (is.peek() != std::char_traits<char>::eof())
    throw CodecError(path + ": trailing bytes");
  return blobs;
}

std::string join(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

void save_key_files(const std::string& dir, const fpcrt::TwinContext& ctx,
                    const fpcrt::TwinKeys& keys) {
  if (keys.kp.size() != ctx.branches() || keys.gks.size() != ctx.branches())
    throw ParamError("save_key_files: key count does not match branches");
  std::filesystem::create_directories(dir);

  save_branches(join(dir, kSecretKeyFile), bfv::ObjectKind::secret_key,
                ctx.branches(), [&](size_t b) {
                  return bfv::to_bytes(keys.kp[b].secret, *ctx.branch(b),
                                       [](std::ostream& os, const auto& k,
                                          const bfv::BfvContext& cx) {
                                         bfv::save_secret_key(os, k, cx);
                                       });
                });
  save_branches(join(dir, kPublicKeyFile), bfv::ObjectKind::public_key,
                ctx.branches(), [&](size_t b) {
                  return bfv::to_bytes(keys.kp[b].pub, *ctx.branch(b),
                                       [](std::ostream& os, const auto& k,
                                          const bfv::BfvContext& cx) {
                                         bfv::save_public_key(os, k, cx);
                                       });
                });
  save_branches(join(dir, kGaloisKeyFile), bfv::ObjectKind::galois_keys,
                ctx.branches(), [&](size_t b) {
                  return bfv::to_bytes(keys.gks[b], *ctx.branch(b),
                                       [](std::ostream& os, const auto& k,
                                          const bfv::BfvContext& cx) {
                                         bfv::save_galois_keys(os, k, cx);
                                       });
                });
}

fpcrt::TwinKeys load_key_files(const std::string& dir,
                               const fpcrt::TwinContext& ctx,
                               bool with_galois) {
  fpcrt::TwinKeys keys;
  auto secrets = load_branches(join(dir, kSecretKeyFile),
                               bfv::ObjectKind::secret_key, ctx.branches());
  auto publics = load_branches(join(dir, kPublicKeyFile),
                               bfv::ObjectKind::public_key, ctx.branches());
  for (size_t b = 0; b < ctx.branches(); ++b) {
    std::istringstream ss(secrets[b]);
    std::istringstream ps(publics[b]);
    bfv::KeyPair kp;
    kp.secret = bfv::load_secret_key(ss, *ctx.branch(b));
    kp.pub = bfv::load_public_key(ps, *ctx.branch(b));
    keys.kp.push_back(std::move(kp));
  }
  if (with_galois)
    keys.gks = load_galois_key_file(join(dir, kGaloisKeyFile), ctx);
  return keys;
}

std::vector<bfv::GaloisKeySet> load_galois_key_file(
    const std::string& path, const fpcrt::TwinContext& ctx) {
  auto blobs =
      load_branches(path, bfv::ObjectKind::galois_keys, ctx.branches());
  std::vector<bfv::GaloisKeySet> gks;
  for (size_t b = 0; b < ctx.branches(); ++b) {
    std::istringstream ss(blobs[b]);
    gks.push_back(bfv::load_galois_keys(ss, *ctx.branch(b)));
  }
  return gks;
}

}  // namespace hei::protocol
