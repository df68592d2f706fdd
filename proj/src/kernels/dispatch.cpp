// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>

#include "hei/kernels/modops.hpp"

namespace hei::kernels {

namespace {
std::atomic<bool> g_force_scalar{false};
}

#ifndef HEI_WITH_AVX2
// Build without the AVX2 TU (non-x86 target): dispatch always lands on scalar.
const Kernels* avx2_kernels() { return nullptr; }
#endif

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

void force_scalar(bool on) { g_force_scalar.store(on, std::memory_order_relaxed); }

bool scalar_forced() { return g_force_scalar.load(std::memory_order_relaxed); }

const Kernels& select(uint64_t q) {
  if (!scalar_forced() && q < (uint64_t(1) << 31) && avx2_available()) {
    if (const Kernels* k = avx2_kernels()) return *k;
  }
  return scalar::kTable;
}

const char* active_isa(uint64_t q) { return select(q).isa; }

}  // namespace hei::kernels
