// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hei/util/errors.hpp"

namespace hei::util {

// Little-endian primitive readers/writers over iostreams. All multi-byte
// fields in the on-disk and wire formats go through these.

inline void write_bytes(std::ostream& os, const void* p, size_t len) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
  if (!os) throw CodecError("write failed");
}

inline void read_bytes(std::istream& is, void* p, size_t len) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
  if (static_cast<size_t>(is.gcount()) != len)
    throw CodecError("unexpected end of stream");
}

template <typename T>
void write_le(std::ostream& os, T v) {
  static_assert(std::is_integral_v<T> || std::is_floating_point_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));  // host is little-endian (x86/aarch64)
  write_bytes(os, buf, sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  read_bytes(is, buf, sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

inline void write_u64_array(std::ostream& os, std::span<const uint64_t> a) {
  write_bytes(os, a.data(), a.size() * sizeof(uint64_t));
}

inline void read_u64_array(std::istream& is, std::span<uint64_t> a) {
  read_bytes(is, a.data(), a.size() * sizeof(uint64_t));
}

inline void write_string(std::ostream& os, const std::string& s) {
  write_le<uint32_t>(os, static_cast<uint32_t>(s.size()));
  write_bytes(os, s.data(), s.size());
}

inline std::string read_string(std::istream& is, uint32_t max_len = 1u << 20) {
  uint32_t len = read_le<uint32_t>(is);
  if (len > max_len) throw CodecError("string length out of range");
  std::string s(len, '\0');
  if (len) read_bytes(is, s.data(), len);
  return s;
}

}  // namespace hei::util
