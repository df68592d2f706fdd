// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/protocol/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <ctime>
#include <sstream>

#include "hei/bfv/serialize.hpp"
#include "hei/protocol/net.hpp"
#include "hei/util/errors.hpp"
#include "hei/util/parallel.hpp"

namespace hei::protocol {

namespace {

WireMessage error_msg(ErrorCode code, const std::string& text) {
  return WireMessage{MsgType::error, encode_error({code, text})};
}

}  // namespace

InferenceServer::InferenceServer(Model model, unsigned threads)
    : model_(std::move(model)),
      ctx_(model_.params),
      quant_(quantize_model(model_)),
      threads_(threads) {
  // The weight plaintexts never change; prepare them once and share them
  // read-only across sessions. No rotation keys are needed for encoding.
  encode_be_ = ctx_.server_backend(
      std::vector<bfv::GaloisKeySet>(ctx_.branches()));
  weights_ = matmul::encode_weights(*encode_be_, quant_.weights);
}

InferenceServer::~InferenceServer() { stop(); }

size_t InferenceServer::session_count() const {
  std::lock_guard lk(mu_);
  return sessions_.size();
}

std::shared_ptr<fpcrt::TwinBackend> InferenceServer::find_session(
    uint64_t id) const {
  std::lock_guard lk(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second.be;
}

WireMessage InferenceServer::handle(const WireMessage& in) {
  try {
    switch (in.type) {
      case MsgType::session_init:
        return do_session_init(in.payload);
      case MsgType::infer_req:
        return do_infer(in.payload);
      default:
        return error_msg(ErrorCode::bad_frame,
                         "unexpected message type for a server");
    }
  } catch (const CodecError& e) {
    return error_msg(ErrorCode::bad_frame, e.what());
  } catch (const RangeError& e) {
    return error_msg(ErrorCode::capacity, e.what());
  } catch (const ParamError& e) {
    return error_msg(ErrorCode::shape_mismatch, e.what());
  } catch (const std::exception& e) {
    return error_msg(ErrorCode::internal, e.what());
  }
}

WireMessage InferenceServer::do_session_init(const std::string& payload) {
  auto init = decode_session_init(payload);
  const auto& p = model_.params;
  if (init.n != p.n || init.t0 != p.t.t0 || init.t1 != p.t.t1)
    return error_msg(ErrorCode::shape_mismatch,
                     "session parameters do not match the served model");
  if (init.s_x != p.scaling.s_x)
    return error_msg(ErrorCode::shape_mismatch,
                     "input scale does not match the served model");
  if (init.galois_blobs.size() != ctx_.branches())
    return error_msg(ErrorCode::shape_mismatch,
                     "one rotation key set per branch required");

  std::vector<bfv::GaloisKeySet> gks;
  for (size_t b = 0; b < ctx_.branches(); ++b) {
    std::istringstream is(init.galois_blobs[b], std::ios::binary);
    gks.push_back(bfv::load_galois_keys(is, *ctx_.branch(b)));
  }

  SessionInfo info;
  info.id = next_session_.fetch_add(1);
  info.created_unix = static_cast<int64_t>(::time(nullptr));
  info.be = ctx_.server_backend(std::move(gks));
  uint64_t id = info.id;
  {
    std::lock_guard lk(mu_);
    sessions_.emplace(id, std::move(info));
  }
  SessionAckPayload ack{id, model_.f(), model_.outputs()};
  return WireMessage{MsgType::session_ack, encode_session_ack(ack)};
}

WireMessage InferenceServer::do_infer(const std::string& payload) {
  auto req = decode_infer_req(payload);
  auto be = find_session(req.session_id);
  if (!be)
    return error_msg(ErrorCode::unknown_session,
                     "session " + std::to_string(req.session_id) +
                         " is not established");
  if (req.f != model_.f())
    return error_msg(ErrorCode::shape_mismatch,
                     "request has " + std::to_string(req.f) +
                         " features, model expects " +
                         std::to_string(model_.f()));
  if (req.rows == 0)
    return error_msg(ErrorCode::shape_mismatch, "request carries no rows");
  const uint32_t n = model_.params.n;
  const size_t branches = ctx_.branches();
  const uint64_t chunks = (req.f + n - 1) / n;
  // Division form so a huge claimed row count cannot wrap the product and
  // sneak past with a short blob list.
  const uint64_t per_row = chunks * branches;
  if (req.ct_blobs.size() % per_row != 0 ||
      req.ct_blobs.size() / per_row != req.rows)
    return error_msg(ErrorCode::shape_mismatch,
                     "ciphertext count does not match rows x chunks");

  matmul::MatmulStream stream(*be, weights_, quant_.bias, req.rows);
  util::parallel_for(
      req.rows,
      [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i) {
          matmul::EncodedInputRow row;
          for (uint64_t c = 0; c < chunks; ++c) {
            fpcrt::TwinCipher ct;
            for (size_t b = 0; b < branches; ++b) {
              const auto& blob =
                  req.ct_blobs[(i * chunks + c) * branches + b];
              std::istringstream is(blob, std::ios::binary);
              ct.b.push_back(
                  bfv::HeCipher{bfv::load_ciphertext(is, *ctx_.branch(b))});
            }
            row.chunks.push_back(std::move(ct));
          }
          stream.push_row(i, row);
        }
      },
      threads_);
  auto packed = stream.finish();

  InferResponsePayload resp;
  resp.rows = req.rows;
  resp.outputs = model_.outputs();
  resp.s_x = model_.params.scaling.s_x;
  resp.s_w = model_.params.scaling.s_w;
  for (const auto& ct : packed.cts)
    for (size_t b = 0; b < branches; ++b)
      resp.ct_blobs.push_back(bfv::to_bytes(
          std::get<bfv::Ciphertext>(ct.b[b].v), *ctx_.branch(b),
          [](std::ostream& os, const bfv::Ciphertext& c,
             const bfv::BfvContext& cx) { bfv::save_ciphertext(os, c, cx); }));
  return WireMessage{MsgType::infer_resp, encode_infer_resp(resp)};
}

void InferenceServer::bind_and_listen(const std::string& address) {
  auto colon = address.rfind(':');
  if (colon == std::string::npos || colon + 1 == address.size())
    throw ProtocolError("address must be host:port, got '" + address + "'");
  std::string host = address.substr(0, colon);
  std::string port = address.substr(colon + 1);

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), port.c_str(),
                         &hints, &res);
  if (rc != 0)
    throw ProtocolError("cannot resolve " + address + ": " + gai_strerror(rc));
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 16) == 0)
      break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ProtocolError("cannot bind " + address);

  sockaddr_storage bound{};
  socklen_t blen = sizeof(bound);
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &blen) == 0) {
    if (bound.ss_family == AF_INET)
      port_ = ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
    else if (bound.ss_family == AF_INET6)
      port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port);
  }
  listen_fd_ = fd;
}

void InferenceServer::accept_loop() {
  while (running_.load()) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (!running_.load()) break;
      if (errno == EINTR) continue;
      break;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lk(conn_mu_);
    conn_threads_.emplace_back([this, fd] { client_loop(fd); });
  }
}

void InferenceServer::client_loop(int fd) {
  WireMessage msg;
  try {
    while (running_.load()) {
      switch (read_frame_fd(fd, msg)) {
        case FrameRead::ok:
          write_frame_fd(fd, handle(msg));
          continue;
        case FrameRead::bad_type:
          // Framing survived; report and keep serving this connection.
          write_frame_fd(fd, error_msg(ErrorCode::bad_frame,
                                       "unknown message type"));
          continue;
        case FrameRead::bad_version:
          write_frame_fd(fd, error_msg(ErrorCode::bad_version,
                                       "protocol version not supported"));
          break;
        case FrameRead::bad_magic:
        case FrameRead::too_large:
          write_frame_fd(fd, error_msg(ErrorCode::bad_frame,
                                       "unreadable frame; closing"));
          break;
        case FrameRead::eof:
        case FrameRead::io_error:
          break;
      }
      break;
    }
  } catch (const ProtocolError&) {
    // Peer went away mid-write; nothing to report to.
  }
  close_fd(fd);
}

void InferenceServer::serve(const std::string& address) {
  bind_and_listen(address);
  running_.store(true);
  accept_loop();
}

void InferenceServer::start(const std::string& address) {
  bind_and_listen(address);
  running_.store(true);
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void InferenceServer::stop() {
  if (!running_.exchange(false)) {
    if (listen_fd_ >= 0) {
      ::close(listen_fd_);
      listen_fd_ = -1;
    }
    return;
  }
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  listen_fd_ = -1;
  if (accept_thread_.joinable()) accept_thread_.join();
  std::lock_guard lk(conn_mu_);
  for (auto& t : conn_threads_)
    if (t.joinable()) t.join();
  conn_threads_.clear();
}

}  // namespace hei::protocol
