// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <unistd.h>

#include <cstdint>
#include <cstring>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hei/fpcrt/fixed_point.hpp"
#include "hei/protocol/client.hpp"
#include "hei/protocol/model.hpp"
#include "hei/protocol/net.hpp"
#include "hei/protocol/server.hpp"
#include "hei/protocol/wire.hpp"
#include "hei/util/errors.hpp"
#include "hei/util/io.hpp"
#include "hei/util/rng.hpp"

using namespace hei;
using namespace hei::protocol;
using util::IntMat;
using util::RealMat;

namespace {

Model make_test_model(size_t outputs, size_t f, uint64_t seed) {
  Model m;
  m.params = fpcrt::test_params();
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> wd(-1.0, 1.0);
  std::uniform_real_distribution<double> bd(-2.0, 2.0);
  m.weights = RealMat(outputs, f);
  for (auto& w : m.weights.a) w = wd(gen);
  m.bias.resize(outputs);
  for (auto& b : m.bias) b = bd(gen);
  for (size_t k = 0; k < f; ++k)
    m.feature_names.push_back("f" + std::to_string(k));
  return m;
}

RealMat random_features(size_t rows, size_t f, uint64_t seed) {
  std::mt19937_64 gen(seed);
  // test params promise inputs in [0, 2^4)
  std::uniform_real_distribution<double> xd(0.0, 15.9);
  RealMat x(rows, f);
  for (auto& v : x.a) v = xd(gen);
  return x;
}

// Reference path: quantize exactly like the evaluator, then plain integer
// arithmetic. The encrypted pipeline must reproduce these values bit for bit.
IntMat oracle_scores(const Model& m, const RealMat& x) {
  auto q = quantize_model(m);
  IntMat out(x.rows, m.outputs());
  for (size_t i = 0; i < x.rows; ++i)
    for (size_t j = 0; j < m.outputs(); ++j) {
      __int128 acc = q.bias.scaled[j];
      for (size_t k = 0; k < x.cols; ++k)
        acc += static_cast<__int128>(
                   fpcrt::scale_value(x(i, k), m.params.scaling.s_x)) *
               q.weights(k, j);
      out(i, j) = static_cast<int64_t>(acc);
    }
  return out;
}

std::vector<uint32_t> oracle_labels(const Model& m, const IntMat& raw) {
  std::vector<uint32_t> labels(raw.rows);
  std::vector<double> row(raw.cols);
  fpcrt::ScalingConfig cfg = m.params.scaling;
  for (size_t i = 0; i < raw.rows; ++i) {
    for (size_t j = 0; j < raw.cols; ++j)
      row[j] = fpcrt::descale_output(raw(i, j), cfg);
    labels[i] = static_cast<uint32_t>(argmax_lowest(row));
  }
  return labels;
}

struct ClientRig {
  fpcrt::TwinContext ctx;
  fpcrt::TwinKeys keys;
  std::unique_ptr<fpcrt::TwinBackend> be;

  explicit ClientRig(const fpcrt::TwinParams& p, uint64_t seed = 11)
      : ctx(p) {
    util::Prng rng(seed);
    keys = ctx.keygen(rng);
    be = ctx.client_backend(keys, seed + 1);
  }
};

// Drive one inference through handle() and return what the client sees.
InferenceResult run_inference(InferenceServer& server, ClientRig& cl,
                              const RealMat& x) {
  auto init = make_session_init(cl.ctx, cl.keys);
  auto ack_msg = server.handle(
      {MsgType::session_init, encode_session_init(init)});
  REQUIRE(ack_msg.type == MsgType::session_ack);
  auto ack = decode_session_ack(ack_msg.payload);
  auto req = client_prepare(cl.ctx, *cl.be, x, ack.session_id);
  auto resp_msg = server.handle({MsgType::infer_req, encode_infer_req(req)});
  REQUIRE(resp_msg.type == MsgType::infer_resp);
  return client_finalize(cl.ctx, *cl.be,
                         decode_infer_resp(resp_msg.payload));
}

void send_raw(int fd, const std::string& bytes) {
  size_t off = 0;
  while (off < bytes.size()) {
    ssize_t w = ::write(fd, bytes.data() + off, bytes.size() - off);
    REQUIRE(w > 0);
    off += static_cast<size_t>(w);
  }
}

// Hand-rolled frame so tests can produce headers write_frame refuses to.
std::string raw_frame(const char* magic, uint16_t ver, uint8_t type,
                      const std::string& payload) {
  std::ostringstream os(std::ios::binary);
  util::write_bytes(os, magic, 4);
  util::write_le<uint16_t>(os, ver);
  util::write_le<uint8_t>(os, type);
  util::write_le<uint64_t>(os, payload.size());
  util::write_bytes(os, payload.data(), payload.size());
  return std::move(os).str();
}

}  // namespace

TEST_CASE("wire payloads survive an encode/decode round trip") {
  SessionInitPayload init;
  init.n = 8192;
  init.t0 = 1073872897;
  init.t1 = 114689;
  init.s_x = 6;
  init.galois_blobs = {"alpha-blob", std::string("\x00\x01\xff", 3), ""};
  auto init_bytes = encode_session_init(init);
  CHECK(decode_session_init(init_bytes) == init);
  CHECK(encode_session_init(decode_session_init(init_bytes)) == init_bytes);

  SessionAckPayload ack{42, 40960, 11};
  auto ack_bytes = encode_session_ack(ack);
  CHECK(decode_session_ack(ack_bytes) == ack);
  CHECK(ack_bytes.size() == 8 + 8 + 4);

  InferRequestPayload req;
  req.session_id = 42;
  req.rows = 3;
  req.f = 123;
  req.ct_blobs = {"aa", "bb", "cc", "dd", "ee", "ff"};
  auto req_bytes = encode_infer_req(req);
  CHECK(decode_infer_req(req_bytes) == req);

  InferResponsePayload resp;
  resp.rows = 3;
  resp.outputs = 11;
  resp.s_x = 6;
  resp.s_w = 14;
  resp.ct_blobs = {"packed0", "packed1"};
  auto resp_bytes = encode_infer_resp(resp);
  CHECK(decode_infer_resp(resp_bytes) == resp);

  ErrorPayload err{ErrorCode::capacity, "product does not fit"};
  auto err_bytes = encode_error(err);
  CHECK(decode_error(err_bytes) == err);

  WireMessage msg{MsgType::infer_req, req_bytes};
  auto framed = frame_bytes(msg);
  CHECK(framed.size() == 15 + req_bytes.size());
  std::istringstream is(framed, std::ios::binary);
  CHECK(read_frame(is) == msg);
}

TEST_CASE("wire framing rejects what it cannot trust") {
  WireMessage msg{MsgType::session_ack, encode_session_ack({1, 2, 3})};
  std::string good = frame_bytes(msg);

  auto reject = [](std::string bytes) {
    std::istringstream is(bytes, std::ios::binary);
    CHECK_THROWS_AS(read_frame(is), CodecError);
  };

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  reject(bad_magic);

  std::string bad_version = good;
  bad_version[4] = 9;
  reject(bad_version);

  std::string bad_type = good;
  bad_type[6] = 0;
  reject(bad_type);
  bad_type[6] = 6;
  reject(bad_type);

  // Truncated at every boundary that matters: header, then mid-payload.
  reject(good.substr(0, 3));
  reject(good.substr(0, 14));
  reject(good.substr(0, good.size() - 1));

  // Length field larger than the hard cap.
  std::string oversize = raw_frame("HEIP", kWireVersion, 2, "");
  uint64_t huge = kMaxFrameLen + 1;
  std::memcpy(oversize.data() + 7, &huge, 8);
  reject(oversize);

  CHECK_THROWS_AS(frame_bytes({static_cast<MsgType>(9), ""}), CodecError);

  // Payload decoders refuse trailing bytes.
  CHECK_THROWS_AS(decode_session_ack(encode_session_ack({1, 2, 3}) + "x"),
                  CodecError);
  CHECK_THROWS_AS(decode_error(encode_error({ErrorCode::internal, "m"}) + "z"),
                  CodecError);
  CHECK_THROWS_AS(decode_session_init(std::string("\x01", 1)), CodecError);
}

TEST_CASE("model files round trip and reject corruption") {
  Model m = make_test_model(3, 5, 77);
  m.feature_names = {"TP53", "BRCA1", "gène_δ", "変異体", "krás"};

  std::ostringstream os(std::ios::binary);
  save_model(os, m);
  std::string bytes = std::move(os).str();

  std::istringstream is(bytes, std::ios::binary);
  Model back = load_model(is);
  CHECK(back.weights == m.weights);
  CHECK(back.bias == m.bias);
  CHECK(back.feature_names == m.feature_names);
  CHECK(back.params.n == m.params.n);
  CHECK(back.params.t.t0 == m.params.t.t0);
  CHECK(back.params.t.t1 == m.params.t.t1);
  CHECK(back.params.scaling.s_x == m.params.scaling.s_x);
  CHECK(back.params.scaling.s_w == m.params.scaling.s_w);
  CHECK(back.params.scaling.input_int_bits ==
        m.params.scaling.input_int_bits);
  CHECK(back.params.security_level == m.params.security_level);

  auto reject_load = [](std::string b) {
    std::istringstream bis(b, std::ios::binary);
    CHECK_THROWS_AS(load_model(bis), CodecError);
  };

  std::string wrong_magic = bytes;
  wrong_magic[0] = 'Q';
  reject_load(wrong_magic);

  std::string wrong_version = bytes;
  wrong_version[4] = 99;
  reject_load(wrong_version);

  // Name count sits right after magic+version+outputs+f.
  std::string wrong_count = bytes;
  uint32_t off_by_one = 4;
  std::memcpy(wrong_count.data() + 4 + 2 + 4 + 8, &off_by_one, 4);
  reject_load(wrong_count);

  reject_load(bytes.substr(0, bytes.size() / 2));

  // A parameter set whose plaintext capacity cannot hold the dot product
  // saves fine but must refuse to load.
  Model hungry = make_test_model(2, 4, 78);
  hungry.params.scaling = fpcrt::ScalingConfig{6, 14, 8};
  std::ostringstream hos(std::ios::binary);
  save_model(hos, hungry);
  std::istringstream his(std::move(hos).str(), std::ios::binary);
  CHECK_THROWS_AS(load_model(his), RangeError);

  SUBCASE("file helpers") {
    save_model_file("/tmp/hei_test_model.bin", m);
    Model from_file = load_model_file("/tmp/hei_test_model.bin");
    CHECK(from_file.weights == m.weights);
    CHECK_THROWS_AS(load_model_file("/tmp/does_not_exist_hei.bin"),
                    CodecError);
  }
}

TEST_CASE("quantize_model transposes and scales") {
  Model m = make_test_model(2, 3, 5);
  m.weights(0, 0) = 0.5;
  m.weights(1, 2) = -0.25;
  m.bias = {1.0, -0.5};
  auto q = quantize_model(m);
  REQUIRE(q.weights.rows == 3);
  REQUIRE(q.weights.cols == 2);
  // s_w = 4 under test params, combined output scale s_x + s_w = 7.
  CHECK(q.weights(0, 0) == 8);
  CHECK(q.weights(2, 1) == -4);
  CHECK(q.bias.scaled[0] == 128);
  CHECK(q.bias.scaled[1] == -64);
}

TEST_CASE("client_prepare validates inputs and sizes the request") {
  auto p = fpcrt::test_params();
  ClientRig cl(p);

  RealMat ok(3, 40);  // two chunks at n=32
  for (auto& v : ok.a) v = 1.5;
  auto req = client_prepare(cl.ctx, *cl.be, ok, 9);
  CHECK(req.session_id == 9);
  CHECK(req.rows == 3);
  CHECK(req.f == 40);
  CHECK(req.ct_blobs.size() == 3 * 2 * 2);  // rows x chunks x branches

  RealMat zeros(1, 4);
  CHECK(client_prepare(cl.ctx, *cl.be, zeros, 1).ct_blobs.size() == 2);

  RealMat hot(2, 4);
  hot(1, 2) = 16.0;  // == 2^input_int_bits, first value outside the promise
  CHECK_THROWS_WITH_AS(client_prepare(cl.ctx, *cl.be, hot, 1),
                       doctest::Contains("row 1 column 2"), RangeError);
  hot(1, 2) = -0.25;
  CHECK_THROWS_AS(client_prepare(cl.ctx, *cl.be, hot, 1), RangeError);
  RealMat empty;
  CHECK_THROWS_AS(client_prepare(cl.ctx, *cl.be, empty, 1), ParamError);
}

TEST_CASE("argmax takes the lowest index on ties") {
  std::vector<double> flat{1.0, 1.0, 1.0};
  CHECK(argmax_lowest(flat) == 0);
  std::vector<double> mid{0.1, 0.9, 0.3};
  CHECK(argmax_lowest(mid) == 1);
  std::vector<double> tie{-5.0, -2.0, -2.0};
  CHECK(argmax_lowest(tie) == 1);
  std::vector<double> one{3.0};
  CHECK(argmax_lowest(one) == 0);
  CHECK_THROWS_AS(argmax_lowest(std::vector<double>{}), ParamError);
}

TEST_CASE("handle() runs encrypted inference that matches the plain oracle") {
  std::mt19937_64 gen(404);
  for (int trial = 0; trial < 12; ++trial) {
    size_t rows = 1 + gen() % 5;
    size_t f = 1 + gen() % 40;
    size_t outputs = 2 + gen() % 4;
    CAPTURE(trial);
    CAPTURE(rows);
    CAPTURE(f);
    CAPTURE(outputs);

    Model m = make_test_model(outputs, f, 1000 + trial);
    InferenceServer server(m, trial % 2 ? 2 : 1);
    ClientRig cl(m.params, 500 + trial);
    RealMat x = random_features(rows, f, 2000 + trial);

    auto got = run_inference(server, cl, x);
    IntMat want_raw = oracle_scores(m, x);
    CHECK(got.raw == want_raw);
    CHECK(got.labels == oracle_labels(m, want_raw));
    REQUIRE(got.scores.rows == rows);
    double scale = std::ldexp(1.0, m.params.scaling.output_scale());
    for (size_t i = 0; i < rows; ++i)
      for (size_t j = 0; j < outputs; ++j)
        CHECK(got.scores(i, j) ==
              doctest::Approx(static_cast<double>(want_raw(i, j)) / scale));
  }
}

TEST_CASE("one session serves many requests") {
  Model m = make_test_model(3, 10, 31);
  InferenceServer server(m);
  ClientRig cl(m.params, 32);

  auto init = make_session_init(cl.ctx, cl.keys);
  auto ack = decode_session_ack(
      server.handle({MsgType::session_init, encode_session_init(init)})
          .payload);
  CHECK(ack.f == 10);
  CHECK(ack.outputs == 3);

  std::vector<std::vector<uint32_t>> reused;
  for (int r = 0; r < 3; ++r) {
    RealMat x = random_features(2, 10, 600 + r);
    auto req = client_prepare(cl.ctx, *cl.be, x, ack.session_id);
    auto resp = decode_infer_resp(
        server.handle({MsgType::infer_req, encode_infer_req(req)}).payload);
    reused.push_back(client_finalize(cl.ctx, *cl.be, resp).labels);
  }
  CHECK(server.session_count() == 1);

  for (int r = 0; r < 3; ++r) {
    ClientRig fresh(m.params, 700 + r);
    RealMat x = random_features(2, 10, 600 + r);
    auto got = run_inference(server, fresh, x);
    CHECK(got.labels == reused[r]);
  }
  CHECK(server.session_count() == 4);
}

TEST_CASE("handle() reports failures as typed errors") {
  Model m = make_test_model(3, 8, 51);
  InferenceServer server(m);
  ClientRig cl(m.params, 52);

  auto expect_error = [&](const WireMessage& in, ErrorCode code) {
    auto out = server.handle(in);
    REQUIRE(out.type == MsgType::error);
    auto err = decode_error(out.payload);
    CHECK(err.code == code);
    CHECK_FALSE(err.message.empty());
  };

  SUBCASE("infer against a session that does not exist") {
    RealMat x = random_features(1, 8, 1);
    auto req = client_prepare(cl.ctx, *cl.be, x, 999);
    expect_error({MsgType::infer_req, encode_infer_req(req)},
                 ErrorCode::unknown_session);
  }

  SUBCASE("feature count differs from the model") {
    auto init = make_session_init(cl.ctx, cl.keys);
    auto ack = decode_session_ack(
        server.handle({MsgType::session_init, encode_session_init(init)})
            .payload);
    RealMat x = random_features(1, 9, 2);
    auto req = client_prepare(cl.ctx, *cl.be, x, ack.session_id);
    expect_error({MsgType::infer_req, encode_infer_req(req)},
                 ErrorCode::shape_mismatch);
  }

  SUBCASE("blob count disagrees with the declared rows") {
    auto init = make_session_init(cl.ctx, cl.keys);
    auto ack = decode_session_ack(
        server.handle({MsgType::session_init, encode_session_init(init)})
            .payload);
    RealMat x = random_features(2, 8, 3);
    auto req = client_prepare(cl.ctx, *cl.be, x, ack.session_id);
    req.rows = 3;
    expect_error({MsgType::infer_req, encode_infer_req(req)},
                 ErrorCode::shape_mismatch);
    req.rows = uint64_t{1} << 63;  // overflow bait
    expect_error({MsgType::infer_req, encode_infer_req(req)},
                 ErrorCode::shape_mismatch);
  }

  SUBCASE("session parameters disagree with the model") {
    auto init = make_session_init(cl.ctx, cl.keys);
    auto wrong = init;
    wrong.n = 64;
    expect_error({MsgType::session_init, encode_session_init(wrong)},
                 ErrorCode::shape_mismatch);
    wrong = init;
    wrong.t1 = 40961;
    expect_error({MsgType::session_init, encode_session_init(wrong)},
                 ErrorCode::shape_mismatch);
    wrong = init;
    wrong.s_x = 5;
    expect_error({MsgType::session_init, encode_session_init(wrong)},
                 ErrorCode::shape_mismatch);
    wrong = init;
    wrong.galois_blobs.pop_back();
    expect_error({MsgType::session_init, encode_session_init(wrong)},
                 ErrorCode::shape_mismatch);
    CHECK(server.session_count() == 0);
  }

  SUBCASE("garbage payload and server-bound message types") {
    expect_error({MsgType::session_init, "not a payload"},
                 ErrorCode::bad_frame);
    expect_error({MsgType::session_ack, ""}, ErrorCode::bad_frame);
    expect_error({MsgType::infer_resp, ""}, ErrorCode::bad_frame);
    expect_error({MsgType::error, ""}, ErrorCode::bad_frame);
  }
}

TEST_CASE("tcp loopback serves the full flow") {
  Model m = make_test_model(3, 12, 61);
  InferenceServer server(m, 2);
  server.start("127.0.0.1:0");
  REQUIRE(server.port() != 0);
  std::string addr = "127.0.0.1:" + std::to_string(server.port());

  ClientRig cl(m.params, 62);
  RealMat x = random_features(3, 12, 63);

  int fd = connect_tcp(addr);
  auto init = make_session_init(cl.ctx, cl.keys);
  auto ack_msg = round_trip(
      fd, {MsgType::session_init, encode_session_init(init)});
  REQUIRE(ack_msg.type == MsgType::session_ack);
  auto ack = decode_session_ack(ack_msg.payload);

  auto req = client_prepare(cl.ctx, *cl.be, x, ack.session_id);
  auto resp_msg = round_trip(fd, {MsgType::infer_req, encode_infer_req(req)});
  REQUIRE(resp_msg.type == MsgType::infer_resp);
  auto over_tcp =
      client_finalize(cl.ctx, *cl.be, decode_infer_resp(resp_msg.payload));
  CHECK(over_tcp.raw == oracle_scores(m, x));

  SUBCASE("unknown frame type draws an error and the socket stays usable") {
    send_raw(fd, raw_frame("HEIP", kWireVersion, 9, "junk payload"));
    WireMessage reply;
    REQUIRE(read_frame_fd(fd, reply) == FrameRead::ok);
    REQUIRE(reply.type == MsgType::error);
    CHECK(decode_error(reply.payload).code == ErrorCode::bad_frame);

    auto again = round_trip(fd, {MsgType::infer_req, encode_infer_req(req)});
    CHECK(again.type == MsgType::infer_resp);
  }

  SUBCASE("version mismatch draws an error and the server hangs up") {
    send_raw(fd, raw_frame("HEIP", 2, 1, ""));
    WireMessage reply;
    REQUIRE(read_frame_fd(fd, reply) == FrameRead::ok);
    REQUIRE(reply.type == MsgType::error);
    CHECK(decode_error(reply.payload).code == ErrorCode::bad_version);
    CHECK(read_frame_fd(fd, reply) == FrameRead::eof);
  }

  SUBCASE("bad magic closes the connection") {
    send_raw(fd, raw_frame("NOPE", kWireVersion, 1, ""));
    WireMessage reply;
    REQUIRE(read_frame_fd(fd, reply) == FrameRead::ok);
    CHECK(decode_error(reply.payload).code == ErrorCode::bad_frame);
    CHECK(read_frame_fd(fd, reply) == FrameRead::eof);
  }

  close_fd(fd);
  server.stop();
}

TEST_CASE("two concurrent tcp clients get independent sessions") {
  Model m = make_test_model(2, 6, 71);
  InferenceServer server(m);
  server.start("127.0.0.1:0");
  std::string addr = "127.0.0.1:" + std::to_string(server.port());

  ClientRig a(m.params, 72), b(m.params, 73);
  int fda = connect_tcp(addr), fdb = connect_tcp(addr);

  auto ack_a = decode_session_ack(
      round_trip(fda, {MsgType::session_init,
                       encode_session_init(make_session_init(a.ctx, a.keys))})
          .payload);
  auto ack_b = decode_session_ack(
      round_trip(fdb, {MsgType::session_init,
                       encode_session_init(make_session_init(b.ctx, b.keys))})
          .payload);
  CHECK(ack_a.session_id != ack_b.session_id);

  RealMat xa = random_features(1, 6, 74), xb = random_features(2, 6, 75);
  auto ra = decode_infer_resp(
      round_trip(fda, {MsgType::infer_req,
                       encode_infer_req(client_prepare(a.ctx, *a.be, xa,
                                                       ack_a.session_id))})
          .payload);
  auto rb = decode_infer_resp(
      round_trip(fdb, {MsgType::infer_req,
                       encode_infer_req(client_prepare(b.ctx, *b.be, xb,
                                                       ack_b.session_id))})
          .payload);
  CHECK(client_finalize(a.ctx, *a.be, ra).raw == oracle_scores(m, xa));
  CHECK(client_finalize(b.ctx, *b.be, rb).raw == oracle_scores(m, xb));

  close_fd(fda);
  close_fd(fdb);
  server.stop();
  CHECK(server.session_count() == 2);
}
