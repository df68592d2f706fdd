// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/protocol/wire.hpp"

#include <sstream>

#include "hei/util/errors.hpp"
#include "hei/util/io.hpp"

namespace hei::protocol {

using util::read_le;
using util::write_le;

namespace {

constexpr char kMagic[4] = {'H', 'E', 'I', 'P'};

bool known_type(uint8_t t) { return t >= 1 && t <= 5; }

void write_blob(std::ostream& os, const std::string& b) {
  write_le<uint64_t>(os, b.size());
  util::write_bytes(os, b.data(), b.size());
}

std::string read_blob(std::istream& is) {
  uint64_t len = read_le<uint64_t>(is);
  if (len > kMaxFrameLen) throw CodecError("blob length out of range");
  std::string b(static_cast<size_t>(len), '\0');
  if (len) util::read_bytes(is, b.data(), b.size());
  return b;
}

void write_blob_list(std::ostream& os, const std::vector<std::string>& v) {
  write_le<uint32_t>(os, static_cast<uint32_t>(v.size()));
  for (const auto& b : v) write_blob(os, b);
}

std::vector<std::string> read_blob_list(std::istream& is) {
  uint32_t count = read_le<uint32_t>(is);
  std::vector<std::string> v;
  v.reserve(count);
  for (uint32_t i = 0; i < count; ++i) v.push_back(read_blob(is));
  return v;
}

// Decoders reject trailing garbage so encode/decode is a bijection.
void expect_end(std::istream& is, const char* what) {
  if (is.peek() != std::char_traits<char>::eof())
    throw CodecError(std::string(what) + ": trailing bytes in payload");
}

}  // namespace

void write_frame(std::ostream& os, const WireMessage& msg) {
  if (!known_type(static_cast<uint8_t>(msg.type)))
    throw CodecError("write_frame: unknown message type");
  if (msg.payload.size() > kMaxFrameLen)
    throw CodecError("write_frame: payload too large");
  util::write_bytes(os, kMagic, 4);
  write_le<uint16_t>(os, kWireVersion);
  write_le<uint8_t>(os, static_cast<uint8_t>(msg.type));
  write_le<uint64_t>(os, msg.payload.size());
  util::write_bytes(os, msg.payload.data(), msg.payload.size());
  os.flush();
}

WireMessage read_frame(std::istream& is) {
  char magic[4];
  util::read_bytes(is, magic, 4);
  if (std::string_view(magic, 4) != std::string_view(kMagic, 4))
    throw CodecError("read_frame: bad magic");
  uint16_t ver = read_le<uint16_t>(is);
  if (ver != kWireVersion)
    throw CodecError("read_frame: unsupported version " + std::to_string(ver));
  uint8_t type = read_le<uint8_t>(is);
  if (!known_type(type)) throw CodecError("read_frame: unknown message type");
  uint64_t len = read_le<uint64_t>(is);
  if (len > kMaxFrameLen) throw CodecError("read_frame: frame too large");
  WireMessage msg;
  msg.type = static_cast<MsgType>(type);
  msg.payload.resize(static_cast<size_t>(len));
  if (len) util::read_bytes(is, msg.payload.data(), msg.payload.size());
  return msg;
}

std::string frame_bytes(const WireMessage& msg) {
  std::ostringstream os(std::ios::binary);
  write_frame(os, msg);
  return std::move(os).str();
}

std::string encode_session_init(const SessionInitPayload& p) {
  std::ostringstream os(std::ios::binary);
  write_le<uint32_t>(os, p.n);
  write_le<uint64_t>(os, p.t0);
  write_le<uint64_t>(os, p.t1);
  write_le<uint32_t>(os, p.s_x);
  write_blob_list(os, p.galois_blobs);
  return std::move(os).str();
}

SessionInitPayload decode_session_init(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  SessionInitPayload p;
  p.n = read_le<uint32_t>(is);
  p.t0 = read_le<uint64_t>(is);
  p.t1 = read_le<uint64_t>(is);
  p.s_x = read_le<uint32_t>(is);
  p.galois_blobs = read_blob_list(is);
  expect_end(is, "session_init");
  return p;
}

std::string encode_session_ack(const SessionAckPayload& p) {
  std::ostringstream os(std::ios::binary);
  write_le<uint64_t>(os, p.session_id);
  write_le<uint64_t>(os, p.f);
  write_le<uint32_t>(os, p.outputs);
  return std::move(os).str();
}

SessionAckPayload decode_session_ack(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  SessionAckPayload p;
  p.session_id = read_le<uint64_t>(is);
  p.f = read_le<uint64_t>(is);
  p.outputs = read_le<uint32_t>(is);
  expect_end(is, "session_ack");
  return p;
}

std::string encode_infer_req(const InferRequestPayload& p) {
  std::ostringstream os(std::ios::binary);
  write_le<uint64_t>(os, p.session_id);
  write_le<uint64_t>(os, p.rows);
  write_le<uint64_t>(os, p.f);
  write_blob_list(os, p.ct_blobs);
  return std::move(os).str();
}

InferRequestPayload decode_infer_req(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  InferRequestPayload p;
  p.session_id = read_le<uint64_t>(is);
  p.rows = read_le<uint64_t>(is);
  p.f = read_le<uint64_t>(is);
  p.ct_blobs = read_blob_list(is);
  expect_end(is, "infer_req");
  return p;
}

std::string encode_infer_resp(const InferResponsePayload& p) {
  std::ostringstream os(std::ios::binary);
  write_le<uint64_t>(os, p.rows);
  write_le<uint32_t>(os, p.outputs);
  write_le<uint32_t>(os, p.s_x);
  write_le<uint32_t>(os, p.s_w);
  write_blob_list(os, p.ct_blobs);
  return std::move(os).str();
}

InferResponsePayload decode_infer_resp(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  InferResponsePayload p;
  p.rows = read_le<uint64_t>(is);
  p.outputs = read_le<uint32_t>(is);
  p.s_x = read_le<uint32_t>(is);
  p.s_w = read_le<uint32_t>(is);
  p.ct_blobs = read_blob_list(is);
  expect_end(is, "infer_resp");
  return p;
}

std::string encode_error(const ErrorPayload& p) {
  std::ostringstream os(std::ios::binary);
  write_le<uint32_t>(os, static_cast<uint32_t>(p.code));
  util::write_string(os, p.message);
  return std::move(os).str();
}

ErrorPayload decode_error(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  ErrorPayload p;
  p.code = static_cast<ErrorCode>(read_le<uint32_t>(is));
  p.message = util::read_string(is);
  expect_end(is, "error");
  return p;
}

}  // namespace hei::protocol
