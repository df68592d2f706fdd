// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace hei {

// Invalid or unsupported parameter set (modulus not NTT-friendly, bound
// exceeded, size mismatch, ...). Thrown during setup, never mid-computation.
class ParamError : public std::invalid_argument {
 public:
  explicit ParamError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Key material missing or inconsistent with the operation (no galois key for
// a step, decrypt without a secret key, params hash mismatch).
class KeyError : public std::logic_error {
 public:
  explicit KeyError(const std::string& msg) : std::logic_error(msg) {}
};

// Value outside the representable range of the fixed-point encoding.
class RangeError : public std::out_of_range {
 public:
  explicit RangeError(const std::string& msg) : std::out_of_range(msg) {}
};

// Noise budget exhausted: decryption would be garbage, refuse instead.
class NoiseError : public std::runtime_error {
 public:
  explicit NoiseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed serialized object or wire message.
class CodecError : public std::runtime_error {
 public:
  explicit CodecError(const std::string& msg) : std::runtime_error(msg) {}
};

// Optimization failure (loss went non-finite, impossible configuration).
class TrainError : public std::runtime_error {
 public:
  explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Socket / session level failure.
class ProtocolError : public std::runtime_error {
 public:
  explicit ProtocolError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hei
