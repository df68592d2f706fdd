// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/bfv/serialize.hpp"

#include <cstring>

#include "hei/ring/sampling.hpp"
#include "hei/util/errors.hpp"
#include "hei/util/io.hpp"

namespace hei::bfv {

namespace {

constexpr char kMagic[4] = {'H', 'E', 'C', 'T'};
constexpr uint16_t kVersion = 1;

void write_header(std::ostream& os, const BfvContext& ctx, uint32_t parts,
                  ObjectKind kind) {
  util::write_bytes(os, kMagic, 4);
  util::write_le<uint16_t>(os, kVersion);
  util::write_le<uint64_t>(os, ctx.hash());
  util::write_le<uint32_t>(os, parts);
  util::write_le<uint8_t>(os, static_cast<uint8_t>(kind));
}

uint32_t read_header(std::istream& is, const BfvContext& ctx,
                     ObjectKind kind) {
  char magic[4];
  util::read_bytes(is, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw CodecError("not a scheme object (bad magic)");
  if (util::read_le<uint16_t>(is) != kVersion)
    throw CodecError("unsupported object version");
  if (util::read_le<uint64_t>(is) != ctx.hash())
    throw CodecError("object was produced under different parameters");
  uint32_t parts = util::read_le<uint32_t>(is);
  if (util::read_le<uint8_t>(is) != static_cast<uint8_t>(kind))
    throw CodecError("object kind mismatch");
  return parts;
}

void write_poly(std::ostream& os, const ring::RingPoly& p) {
  util::write_le<uint8_t>(os, static_cast<uint8_t>(p.form));
  util::write_u64_array(os, p.c);
}

ring::RingPoly read_poly(std::istream& is, uint32_t n, uint64_t q,
                         ring::PolyForm expect) {
  uint8_t form = util::read_le<uint8_t>(is);
  if (form != static_cast<uint8_t>(expect))
    throw CodecError("unexpected polynomial form");
  ring::RingPoly p = ring::RingPoly::zero(n, q, expect);
  util::read_u64_array(is, p.c);
  for (uint64_t v : p.c)
    if (v >= q) throw CodecError("coefficient not reduced");
  return p;
}

}  // namespace

void save_ciphertext(std::ostream& os, const Ciphertext& ct,
                     const BfvContext& ctx) {
  if (ct.params_hash != ctx.hash())
    throw CodecError("ciphertext belongs to a different parameter set");
  Ciphertext canon;
  const Ciphertext* src = &ct;
  if (ct.form() != ring::PolyForm::coeff) {
    canon = ct;
    ctx.to_coeff(canon);
    src = &canon;
  }
  write_header(os, ctx, 2, ObjectKind::ciphertext);
  for (int part = 0; part < 2; ++part)
    for (size_t i = 0; i < ctx.num_primes(); ++i)
      write_poly(os, src->parts[part][i]);
}

Ciphertext load_ciphertext(std::istream& is, const BfvContext& ctx) {
  uint32_t parts = read_header(is, ctx, ObjectKind::ciphertext);
  if (parts != 2) throw CodecError("ciphertext must have two parts");
  Ciphertext ct;
  ct.params_hash = ctx.hash();
  for (int part = 0; part < 2; ++part)
    for (size_t i = 0; i < ctx.num_primes(); ++i)
      ct.parts[part].push_back(
          read_poly(is, ctx.n(), ctx.params().q[i], ring::PolyForm::coeff));
  return ct;
}

void save_plaintext(std::ostream& os, const Plaintext& pt,
                    const BfvContext& ctx) {
  if (pt.params_hash != ctx.hash())
    throw CodecError("plaintext belongs to a different parameter set");
  write_header(os, ctx, 1, ObjectKind::plaintext);
  write_poly(os, pt.poly);
}

Plaintext load_plaintext(std::istream& is, const BfvContext& ctx) {
  uint32_t parts = read_header(is, ctx, ObjectKind::plaintext);
  if (parts != 1) throw CodecError("plaintext must have one part");
  Plaintext pt;
  pt.params_hash = ctx.hash();
  pt.poly = read_poly(is, ctx.n(), ctx.t(), ring::PolyForm::coeff);
  return pt;
}

void save_secret_key(std::ostream& os, const SecretKey& sk,
                     const BfvContext& ctx) {
  if (sk.params_hash != ctx.hash())
    throw CodecError("secret key belongs to a different parameter set");
  write_header(os, ctx, 1, ObjectKind::secret_key);
  for (size_t i = 0; i < ctx.num_primes(); ++i)
    write_poly(os, ring::lift_signed(sk.s, ctx.n(), ctx.params().q[i]));
}

SecretKey load_secret_key(std::istream& is, const BfvContext& ctx) {
  uint32_t parts = read_header(is, ctx, ObjectKind::secret_key);
  if (parts != 1) throw CodecError("secret key must have one part");
  std::vector<ring::RingPoly> polys;
  for (size_t i = 0; i < ctx.num_primes(); ++i)
    polys.push_back(
        read_poly(is, ctx.n(), ctx.params().q[i], ring::PolyForm::coeff));
  SecretKey sk;
  sk.params_hash = ctx.hash();
  sk.s.resize(ctx.n());
  for (uint32_t j = 0; j < ctx.n(); ++j) {
    uint64_t v = polys[0].c[j];
    int8_t sv;
    if (v == 0) {
      sv = 0;
    } else if (v == 1) {
      sv = 1;
    } else if (v == ctx.params().q[0] - 1) {
      sv = -1;
    } else {
      throw CodecError("secret key residue is not ternary");
    }
    sk.s[j] = sv;
    // all residue rows must describe the same integer polynomial
    for (size_t i = 1; i < polys.size(); ++i) {
      uint64_t qi = ctx.params().q[i];
      uint64_t expect = sv >= 0 ? static_cast<uint64_t>(sv) : qi - 1;
      if (polys[i].c[j] != expect)
        throw CodecError("inconsistent secret key residues");
    }
  }
  return sk;
}

void save_public_key(std::ostream& os, const PublicKey& pk,
                     const BfvContext& ctx) {
  if (pk.params_hash != ctx.hash())
    throw CodecError("public key belongs to a different parameter set");
  write_header(os, ctx, 2, ObjectKind::public_key);
  for (size_t i = 0; i < ctx.num_primes(); ++i) write_poly(os, pk.p0[i]);
  for (size_t i = 0; i < ctx.num_primes(); ++i) write_poly(os, pk.p1[i]);
}

PublicKey load_public_key(std::istream& is, const BfvContext& ctx) {
  uint32_t parts = read_header(is, ctx, ObjectKind::public_key);
  if (parts != 2) throw CodecError("public key must have two parts");
  PublicKey pk;
  pk.params_hash = ctx.hash();
  for (size_t i = 0; i < ctx.num_primes(); ++i)
    pk.p0.push_back(
        read_poly(is, ctx.n(), ctx.params().q[i], ring::PolyForm::coeff));
  for (size_t i = 0; i < ctx.num_primes(); ++i)
    pk.p1.push_back(
        read_poly(is, ctx.n(), ctx.params().q[i], ring::PolyForm::coeff));
  return pk;
}

void save_galois_keys(std::ostream& os, const GaloisKeySet& gk,
                      const BfvContext& ctx) {
  if (gk.params_hash != ctx.hash())
    throw CodecError("galois keys belong to a different parameter set");
  write_header(os, ctx, static_cast<uint32_t>(gk.keys.size()),
               ObjectKind::galois_keys);
  const size_t L = ctx.num_primes();
  for (const auto& [elt, key] : gk.keys) {
    util::write_le<uint64_t>(os, elt);
    for (size_t l = 0; l < L; ++l) {
      for (int part = 0; part < 2; ++part) {
        for (size_t i = 0; i < L; ++i) {
          util::write_le<uint8_t>(os,
                                  static_cast<uint8_t>(ring::PolyForm::eval));
          util::write_u64_array(os, key.rows[l][part][i].vals);
        }
      }
    }
  }
}

GaloisKeySet load_galois_keys(std::istream& is, const BfvContext& ctx) {
  uint32_t count = read_header(is, ctx, ObjectKind::galois_keys);
  const size_t L = ctx.num_primes();
  GaloisKeySet out;
  out.params_hash = ctx.hash();
  for (uint32_t k = 0; k < count; ++k) {
    uint64_t elt = util::read_le<uint64_t>(is);
    GaloisKey key;
    key.galois_elt = elt;
    key.rows.resize(L);
    for (size_t l = 0; l < L; ++l) {
      for (int part = 0; part < 2; ++part) {
        for (size_t i = 0; i < L; ++i) {
          ring::RingPoly p = read_poly(is, ctx.n(), ctx.params().q[i],
                                       ring::PolyForm::eval);
          key.rows[l][part].push_back(ring::prepare(p));
        }
      }
    }
    out.keys.emplace(elt, std::move(key));
  }
  return out;
}

}  // namespace hei::bfv
