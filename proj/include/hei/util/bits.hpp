// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>

namespace hei::util {

constexpr bool is_power_of_two(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

// log2 of a power of two.
constexpr uint32_t log2_exact(uint64_t v) {
  return static_cast<uint32_t>(std::bit_width(v) - 1);
}

// Reverse the low `bits` bits of v.
constexpr uint32_t reverse_bits(uint32_t v, uint32_t bits) {
  uint32_t r = 0;
  for (uint32_t i = 0; i < bits; ++i) {
    r = (r << 1) | ((v >> i) & 1u);
  }
  return r;
}

constexpr uint32_t msb_index(uint64_t v) {
  return static_cast<uint32_t>(std::bit_width(v) - 1);  // v > 0
}

}  // namespace hei::util
