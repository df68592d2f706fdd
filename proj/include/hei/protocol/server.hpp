// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "hei/fpcrt/twin.hpp"
#include "hei/matmul/matmul.hpp"
#include "hei/protocol/model.hpp"
#include "hei/protocol/wire.hpp"

namespace hei::protocol {

// One client's evaluation state. Only public material lives here: the
// backend is evaluation-only by construction, so this process cannot
// decrypt anything it computes on.
struct SessionInfo {
  uint64_t id = 0;
  int64_t created_unix = 0;
  std::shared_ptr<fpcrt::TwinBackend> be;
};

class InferenceServer {
 public:
  explicit InferenceServer(Model model, unsigned threads = 0);

  // Message-level entry point, independent of any transport. Never throws:
  // failures come back as error messages.
  WireMessage handle(const WireMessage& in);

  const Model& model() const { return model_; }
  const fpcrt::TwinContext& context() const { return ctx_; }
  size_t session_count() const;

  // TCP front end. serve() blocks; start() runs the same loop on a
  // background thread and returns once the socket is listening, for tests
  // and for the CLI's foreground/background choice. Port 0 binds ephemeral.
  void serve(const std::string& address);
  void start(const std::string& address);
  void stop();
  uint16_t port() const { return port_; }

  ~InferenceServer();

 private:
  WireMessage do_session_init(const std::string& payload);
  WireMessage do_infer(const std::string& payload);
  std::shared_ptr<fpcrt::TwinBackend> find_session(uint64_t id) const;
  void bind_and_listen(const std::string& address);
  void accept_loop();
  void client_loop(int fd);

  Model model_;
  fpcrt::TwinContext ctx_;
  QuantizedModel quant_;
  std::unique_ptr<fpcrt::TwinBackend> encode_be_;  // keyless, encodes weights
  matmul::EncodedWeights weights_;
  unsigned threads_;

  mutable std::mutex mu_;
  std::unordered_map<uint64_t, SessionInfo> sessions_;
  std::atomic<uint64_t> next_session_{1};

  std::atomic<bool> running_{false};
  int listen_fd_ = -1;
  uint16_t port_ = 0;
  std::thread accept_thread_;
  std::mutex conn_mu_;
  std::vector<std::thread> conn_threads_;
};

}  // namespace hei::protocol
