// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace hei::protocol {

// Frame layout, all little-endian:
//   "HEIP" | version u16 | msg_type u8 | payload_len u64 | payload bytes
// Payload encodings per message type live below; ciphertext and key blobs
// inside payloads are the binary container format from bfv/serialize.hpp,
// length-prefixed with u64.

inline constexpr uint16_t kWireVersion = 1;
inline constexpr uint64_t kMaxFrameLen = uint64_t{1} << 33;

enum class MsgType : uint8_t {
  session_init = 1,
  session_ack = 2,
  infer_req = 3,
  infer_resp = 4,
  error = 5,
};

struct WireMessage {
  MsgType type;
  std::string payload;
  bool operator==(const WireMessage&) const = default;
};

void write_frame(std::ostream& os, const WireMessage& msg);
WireMessage read_frame(std::istream& is);
std::string frame_bytes(const WireMessage& msg);

// Client -> server, once per session: ring and plaintext parameters the
// ciphertexts were produced under, the input scale, and rotation keys for
// both plaintext-modulus branches.
struct SessionInitPayload {
  uint32_t n = 0;
  uint64_t t0 = 0, t1 = 0;
  uint32_t s_x = 0;
  std::vector<std::string> galois_blobs;  // one per branch
  bool operator==(const SessionInitPayload&) const = default;
};

// Server -> client: handle for later requests plus the model shape.
struct SessionAckPayload {
  uint64_t session_id = 0;
  uint64_t f = 0;
  uint32_t outputs = 0;
  bool operator==(const SessionAckPayload&) const = default;
};

// Client -> server: encrypted input rows. Blob order is row-major, then
// chunk, then branch: rows x ceil(f/n) x branches entries.
struct InferRequestPayload {
  uint64_t session_id = 0;
  uint64_t rows = 0;
  uint64_t f = 0;
  std::vector<std::string> ct_blobs;
  bool operator==(const InferRequestPayload&) const = default;
};

// Server -> client: packed result ciphertexts (ct-major, then branch) plus
// the scales needed to descale offline.
struct InferResponsePayload {
  uint64_t rows = 0;
  uint32_t outputs = 0;
  uint32_t s_x = 0, s_w = 0;
  std::vector<std::string> ct_blobs;
  bool operator==(const InferResponsePayload&) const = default;
};

enum class ErrorCode : uint32_t {
  bad_frame = 1,
  bad_version = 2,
  unknown_session = 3,
  shape_mismatch = 4,
  capacity = 5,
  internal = 6,
};

struct ErrorPayload {
  ErrorCode code = ErrorCode::internal;
  std::string message;
  bool operator==(const ErrorPayload&) const = default;
};

std::string encode_session_init(const SessionInitPayload& p);
SessionInitPayload decode_session_init(const std::string& bytes);
std::string encode_session_ack(const SessionAckPayload& p);
SessionAckPayload decode_session_ack(const std::string& bytes);
std::string encode_infer_req(const InferRequestPayload& p);
InferRequestPayload decode_infer_req(const std::string& bytes);
std::string encode_infer_resp(const InferResponsePayload& p);
InferResponsePayload decode_infer_resp(const std::string& bytes);
std::string encode_error(const ErrorPayload& p);
ErrorPayload decode_error(const std::string& bytes);

}  // namespace hei::protocol
