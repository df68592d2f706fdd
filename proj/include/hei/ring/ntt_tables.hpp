// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "hei/kernels/modops.hpp"

namespace hei::ring {

// Twiddle factors for the negacyclic NTT over Z_q[x]/(x^n + 1); one instance
// per (n, q). Roots are chosen deterministically from (n, q).
class NttTables {
 public:
  NttTables(uint32_t n, uint64_t q);

  const kernels::NttView& view() const { return view_; }
  uint32_t size() const { return n_; }
  uint64_t modulus() const { return q_; }
  uint64_t psi() const { return psi_; }

  NttTables(const NttTables&) = delete;
  NttTables& operator=(const NttTables&) = delete;
  NttTables(NttTables&&) = delete;

 private:
  uint32_t n_;
  uint64_t q_;
  uint64_t psi_;
  std::vector<uint64_t> zetas_, zetas_shoup_, inv_zetas_, inv_zetas_shoup_;
  kernels::NttView view_;
};

}  // namespace hei::ring
