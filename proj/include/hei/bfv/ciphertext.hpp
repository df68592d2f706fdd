// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hei/ring/poly.hpp"

namespace hei::bfv {

// Batched plaintext: polynomial mod t, coefficient form (slot values are
// related to coefficients through the encoder's index map + NTT).
struct Plaintext {
  ring::RingPoly poly;
  uint64_t params_hash = 0;
};

// Plaintext lifted mod every ciphertext prime in eval form with Shoup
// constants: the reusable operand of ciphertext-plaintext products.
struct EvalPlain {
  std::vector<ring::PreparedPoly> primes;
  uint64_t params_hash = 0;
};

// Two-part ciphertext; parts[k][i] is part k mod prime i. All component
// polynomials share one form at any time. Canonical (wire) form is coeff;
// evaluation pipelines keep ciphertexts in eval form between operations.
struct Ciphertext {
  std::array<std::vector<ring::RingPoly>, 2> parts;
  uint64_t params_hash = 0;

  ring::PolyForm form() const {
    return parts[0].empty() ? ring::PolyForm::coeff : parts[0][0].form;
  }
};

}  // namespace hei::bfv
