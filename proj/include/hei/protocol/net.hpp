// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "hei/protocol/wire.hpp"

namespace hei::protocol {

// Plain stream sockets with the frame format from wire.hpp. Addresses are
// "host:port"; host may be a dotted quad or a name.

int connect_tcp(const std::string& address);  // throws ProtocolError
void close_fd(int fd);

enum class FrameRead {
  ok,
  eof,          // clean close at a frame boundary
  bad_magic,    // stream is not speaking this protocol; unrecoverable
  bad_version,  // well-formed header, wrong version; sender should close
  bad_type,     // unknown message type; payload was consumed, stream usable
  too_large,    // declared length over the cap; unrecoverable
  io_error,
};

FrameRead read_frame_fd(int fd, WireMessage& out);
void write_frame_fd(int fd, const WireMessage& msg);  // throws ProtocolError

// One request/response exchange; throws ProtocolError if the peer closes or
// the reply frame is unreadable.
WireMessage round_trip(int fd, const WireMessage& msg);

}  // namespace hei::protocol
