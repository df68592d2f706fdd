// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/protocol/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "hei/util/errors.hpp"

namespace hei::protocol {

namespace {

bool read_exact(int fd, void* buf, size_t len) {
  auto* p = static_cast<char*>(buf);
  size_t got = 0;
  while (got < len) {
    ssize_t r = ::read(fd, p + got, len - got);
    if (r == 0) return false;
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    got += static_cast<size_t>(r);
  }
  return true;
}

void write_all(int fd, const void* buf, size_t len) {
  const auto* p = static_cast<const char*>(buf);
  size_t sent = 0;
  while (sent < len) {
    ssize_t w = ::write(fd, p + sent, len - sent);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("socket write: ") + std::strerror(errno));
    }
    sent += static_cast<size_t>(w);
  }
}

uint64_t load_le64(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

bool drain(int fd, uint64_t len) {
  char sink[4096];
  while (len > 0) {
    size_t take = len < sizeof(sink) ? static_cast<size_t>(len) : sizeof(sink);
    if (!read_exact(fd, sink, take)) return false;
    len -= take;
  }
  return true;
}

}  // namespace

int connect_tcp(const std::string& address) {
  auto colon = address.rfind(':');
  if (colon == std::string::npos || colon + 1 == address.size())
    throw ProtocolError("address must be host:port, got '" + address + "'");
  std::string host = address.substr(0, colon);
  std::string port = address.substr(colon + 1);

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0)
    throw ProtocolError("cannot resolve " + address + ": " + gai_strerror(rc));
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ProtocolError("cannot connect to " + address);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return fd;
}

void close_fd(int fd) {
  if (fd >= 0) ::close(fd);
}

FrameRead read_frame_fd(int fd, WireMessage& out) {
  unsigned char hdr[15];  // magic 4, version 2, type 1, len 8
  ssize_t first = ::read(fd, hdr, 1);
  if (first == 0) return FrameRead::eof;
  if (first < 0) return errno == EINTR ? read_frame_fd(fd, out)
                                       : FrameRead::io_error;
  if (!read_exact(fd, hdr + 1, sizeof(hdr) - 1)) return FrameRead::io_error;
  if (hdr[0] != 'H' || hdr[1] != 'E' || hdr[2] != 'I' || hdr[3] != 'P')
    return FrameRead::bad_magic;
  uint16_t ver = static_cast<uint16_t>(hdr[4] | (hdr[5] << 8));
  uint8_t type = hdr[6];
  uint64_t len = load_le64(hdr + 7);
  if (ver != kWireVersion) return FrameRead::bad_version;
  if (len > kMaxFrameLen) return FrameRead::too_large;
  if (type < 1 || type > 5) {
    // Header was sound; skip the body so the stream stays usable.
    if (!drain(fd, len)) return FrameRead::io_error;
    return FrameRead::bad_type;
  }
  out.type = static_cast<MsgType>(type);
  out.payload.resize(static_cast<size_t>(len));
  if (len && !read_exact(fd, out.payload.data(), out.payload.size()))
    return FrameRead::io_error;
  return FrameRead::ok;
}

void write_frame_fd(int fd, const WireMessage& msg) {
  std::string bytes = frame_bytes(msg);
  write_all(fd, bytes.data(), bytes.size());
}

WireMessage round_trip(int fd, const WireMessage& msg) {
  write_frame_fd(fd, msg);
  WireMessage reply;
  switch (read_frame_fd(fd, reply)) {
    case FrameRead::ok:
      return reply;
    case FrameRead::eof:
      throw ProtocolError("connection closed while awaiting reply");
    case FrameRead::bad_version:
      throw ProtocolError("peer speaks a different protocol version");
    default:
      throw ProtocolError("unreadable reply frame");
  }
}

}  // namespace hei::protocol
