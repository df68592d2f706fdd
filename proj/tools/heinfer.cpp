// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

// heinfer: one binary for the whole flow. Plaintext side: encode-features,
// select-features, train. Encrypted side: keygen, encrypt, serve, infer,
// decrypt, bench. Data goes to stdout (or --out); progress goes to stderr.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hei/fpcrt/fixed_point.hpp"
#include "hei/fpcrt/twin.hpp"
#include "hei/genomics/features.hpp"
#include "hei/genomics/records.hpp"
#include "hei/genomics/synthetic.hpp"
#include "hei/genomics/train.hpp"
#include "hei/matmul/matmul.hpp"
#include "hei/protocol/client.hpp"
#include "hei/protocol/keyfiles.hpp"
#include "hei/protocol/model.hpp"
#include "hei/protocol/net.hpp"
#include "hei/protocol/server.hpp"
#include "hei/protocol/wire.hpp"
#include "hei/util/errors.hpp"
#include "hei/util/io.hpp"
#include "hei/util/matrix.hpp"
#include "hei/util/parallel.hpp"
#include "hei/util/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;
using namespace hei;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fpcrt::TwinParams preset_params(const std::string& name) {
  if (name == "test32") return fpcrt::test_params();
  return fpcrt::production_params();  // "paper8192", enforced by the CLI
}

// --threads wins; HEINFER_THREADS is the fallback; 0 lets the worker pool
// pick the hardware count.
unsigned resolve_threads(unsigned flag_value) {
  if (flag_value != 0) return flag_value;
  if (const char* env = std::getenv("HEINFER_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 0) return static_cast<unsigned>(v);
    std::fprintf(stderr, "heinfer: ignoring unparsable HEINFER_THREADS=%s\n",
                 env);
  }
  return 0;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw CodecError("cannot write " + path);
  return file;
}

// Offline request/response containers, so encrypt / infer / decrypt can run
// as separate invocations. Little-endian:
//   "HREQ" | version u16 | n u32 | t0 u64 | t1 u64 | security u32 | s_x u32
//          | u64 payload length | INFER_REQ payload
//   "HRSP" | version u16 | n u32 | t0 u64 | t1 u64 | security u32
//          | u64 payload length | INFER_RESP payload
constexpr uint16_t kBlobFileVersion = 1;

void save_blob_file(const std::string& path, const char magic[4],
                    const fpcrt::TwinParams& p, bool with_sx,
                    const std::string& payload) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CodecError("cannot write " + path);
  util::write_bytes(os, magic, 4);
  util::write_le<uint16_t>(os, kBlobFileVersion);
  util::write_le<uint32_t>(os, p.n);
  util::write_le<uint64_t>(os, p.t.t0);
  util::write_le<uint64_t>(os, p.t.t1);
  util::write_le<uint32_t>(os, static_cast<uint32_t>(p.security_level));
  if (with_sx) util::write_le<uint32_t>(os, p.scaling.s_x);
  util::write_le<uint64_t>(os, payload.size());
  util::write_bytes(os, payload.data(), payload.size());
  os.flush();
  if (!os) throw CodecError("write failed for " + path);
}

std::string load_blob_file(const std::string& path, const char magic[4],
                           fpcrt::TwinParams& p, bool with_sx) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CodecError("cannot open " + path);
  char m[4];
  util::read_bytes(is, m, 4);
  if (std::memcmp(m, magic, 4) != 0)
    throw CodecError(path + ": wrong file type");
  if (util::read_le<uint16_t>(is) != kBlobFileVersion)
    throw CodecError(path + ": unsupported version");
  p = fpcrt::TwinParams{};
  p.n = util::read_le<uint32_t>(is);
  p.t.t0 = util::read_le<uint64_t>(is);
  p.t.t1 = util::read_le<uint64_t>(is);
  p.security_level = static_cast<int>(util::read_le<uint32_t>(is));
  if (with_sx) p.scaling.s_x = util::read_le<uint32_t>(is);
  uint64_t len = util::read_le<uint64_t>(is);
  if (len > protocol::kMaxFrameLen) throw CodecError(path + ": oversize");
  std::string payload(len, '\0');
  util::read_bytes(is, payload.data(), len);
  return payload;
}

constexpr char kReqMagic[4] = {'H', 'R', 'E', 'Q'};
constexpr char kRspMagic[4] = {'H', 'R', 'S', 'P'};

template <typename Fn>
auto load_tsv(const std::string& path, Fn fn) {
  std::ifstream is(path);
  if (!is) throw CodecError("cannot open " + path);
  return fn(is);
}

// ---------------------------------------------------------------- keygen

int run_keygen(const std::string& preset, const std::string& dir,
               uint64_t seed) {
  fpcrt::TwinContext ctx(preset_params(preset));
  util::Prng rng = seed ? util::Prng(seed) : util::Prng::from_entropy();
  auto t0 = Clock::now();
  fpcrt::TwinKeys keys = ctx.keygen(rng);
  protocol::save_key_files(dir, ctx, keys);
  std::fprintf(stderr, "wrote %s/{%s,%s,%s} (%s, %.2fs)\n", dir.c_str(),
               protocol::kSecretKeyFile, protocol::kPublicKeyFile,
               protocol::kGaloisKeyFile, preset.c_str(), since(t0));
  return 0;
}

// -------------------------------------------------------- encode-features

struct EncodeOpts {
  std::string snv, cnv, labels;
  bool synthetic = false;
  genomics::CohortSpec spec;
  std::string emit_tsv;
  std::string mode = "impact";
  size_t top_genes = 10000;
  std::string out, csv;
  unsigned threads = 0;
};

int run_encode(const EncodeOpts& o) {
  std::vector<genomics::SnvRecord> snv;
  std::vector<genomics::CnvRecord> cnv;
  genomics::LabelMap labels;

  if (o.synthetic) {
    auto cohort = genomics::generate_synthetic_cohort(o.spec);
    snv = std::move(cohort.snv);
    cnv = std::move(cohort.cnv);
    labels = std::move(cohort.labels);
    if (!o.emit_tsv.empty()) {
      std::filesystem::create_directories(o.emit_tsv);
      auto emit = [&](const char* name, auto writer) {
        std::ofstream os(std::filesystem::path(o.emit_tsv) / name);
        if (!os) throw CodecError("cannot write " + o.emit_tsv);
        writer(os);
      };
      emit("snv.tsv",
           [&](std::ostream& os) { genomics::save_snv_tsv(os, snv); });
      emit("cnv.tsv",
           [&](std::ostream& os) { genomics::save_cnv_tsv(os, cnv); });
      emit("labels.tsv",
           [&](std::ostream& os) { genomics::save_labels_tsv(os, labels); });
      std::fprintf(stderr, "wrote %s/{snv,cnv,labels}.tsv\n",
                   o.emit_tsv.c_str());
    }
  } else {
    if (o.snv.empty() || o.cnv.empty() || o.labels.empty())
      throw ParamError(
          "encode-features needs --snv, --cnv and --labels (or --synthetic)");
    snv = load_tsv(o.snv, genomics::load_snv_tsv);
    cnv = load_tsv(o.cnv, genomics::load_cnv_tsv);
    labels = load_tsv(o.labels, genomics::load_labels_tsv);
  }

  auto snv_genes =
      genomics::rank_genes_by_snv_frequency(snv, labels, o.top_genes);
  auto cnv_genes = genomics::cnv_gene_universe(cnv);
  auto mode = o.mode == "presence" ? genomics::SnvMode::presence
                                   : genomics::SnvMode::impact;
  auto f = genomics::build_feature_matrix(snv, cnv, labels, snv_genes,
                                          cnv_genes, mode,
                                          resolve_threads(o.threads));
  genomics::save_feature_matrix_file(o.out, f);
  if (!o.csv.empty()) {
    std::ofstream os(o.csv);
    if (!os) throw CodecError("cannot write " + o.csv);
    genomics::write_feature_csv(os, f);
  }
  std::fprintf(stderr,
               "%zu samples x %zu features (%zu snv genes + %zu cnv genes), "
               "%u classes -> %s\n",
               f.samples(), f.features(), snv_genes.size(), cnv_genes.size(),
               f.classes, o.out.c_str());
  return 0;
}

// -------------------------------------------------------- select-features

int run_select(const std::string& in, size_t top_k, const std::string& out,
               const std::string& scores_csv, unsigned threads) {
  auto f = genomics::load_feature_matrix_file(in);
  auto scores = genomics::chi2_scores(f, resolve_threads(threads));
  auto keep = genomics::select_top_k(scores, top_k);
  auto g = genomics::select_columns(f, keep);
  genomics::save_feature_matrix_file(out, g);

  if (!scores_csv.empty()) {
    std::ofstream os(scores_csv);
    if (!os) throw CodecError("cannot write " + scores_csv);
    os << "feature,name,score,selected\n";
    std::vector<bool> sel(scores.size(), false);
    for (size_t i : keep) sel[i] = true;
    for (size_t i = 0; i < scores.size(); ++i)
      os << i << ',' << f.names[i] << ',' << scores[i] << ','
         << (sel[i] ? 1 : 0) << '\n';
  }
  std::fprintf(stderr, "kept %zu of %zu features -> %s\n", g.features(),
               f.features(), out.c_str());
  return 0;
}

// ------------------------------------------------------------------ train

struct TrainOpts {
  std::string features, model_out, metrics, roc;
  std::string preset = "paper8192";
  double lambda = -1.0;
  size_t folds = 5;
  size_t epochs = 10000;
  size_t cv_epochs = 800;
  double test_fraction = 0.2;
  uint64_t seed = 1;
};

int run_train(const TrainOpts& o) {
  auto f = genomics::load_feature_matrix_file(o.features);
  auto split = genomics::stratified_split(f.labels, o.test_fraction, o.seed);
  auto ftr = genomics::select_rows(f, split.train);
  auto fte = genomics::select_rows(f, split.test);
  std::fprintf(stderr, "train %zu / test %zu samples, %zu features\n",
               ftr.samples(), fte.samples(), f.features());

  double lambda = o.lambda;
  if (lambda < 0) {
    genomics::TrainOptions cv_opts;
    cv_opts.epochs = o.cv_epochs;
    std::vector<double> grid{1e-4, 1e-3, 1e-2, 1e-1};
    auto t0 = Clock::now();
    lambda = genomics::cv_select_lambda(ftr, grid, o.folds, o.seed + 1,
                                        cv_opts);
    std::fprintf(stderr, "%zu-fold cv picked lambda=%g (%.2fs)\n", o.folds,
                 lambda, since(t0));
  }

  genomics::TrainOptions opts;
  opts.epochs = o.epochs;
  auto t1 = Clock::now();
  auto m = genomics::train_lr_l1(ftr, lambda, opts);
  size_t nnz = 0;
  double wmax = 0;
  for (double v : m.w.a) {
    nnz += v != 0.0;
    wmax = std::max(wmax, std::abs(v));
  }
  std::fprintf(stderr,
               "trained %zu epochs, objective %.6f, %zu/%zu weights nonzero "
               "(%.2fs)\n",
               m.epochs_run, m.final_objective, nnz, m.w.a.size(), since(t1));

  auto scores = genomics::predict_scores(fte, m);
  auto pred = genomics::predict(fte, m);
  auto met = genomics::evaluate(pred, fte.labels, scores);
  std::fprintf(stderr, "held-out accuracy %.4f, micro auc %.4f\n",
               met.accuracy, met.micro_auc);

  if (!o.metrics.empty()) {
    std::ofstream os(o.metrics);
    if (!os) throw CodecError("cannot write " + o.metrics);
    genomics::write_metrics_json(os, met);
  }
  if (!o.roc.empty()) {
    std::ofstream os(o.roc);
    if (!os) throw CodecError("cannot write " + o.roc);
    genomics::write_roc_csv(os, scores, fte.labels);
  }

  protocol::Model model;
  model.params = preset_params(o.preset);
  model.feature_names = m.feature_names;
  model.weights = m.w;
  model.bias = m.b;
  if (wmax >= 1.0)
    std::fprintf(stderr,
                 "warning: max |weight| is %.3f; the fixed-point budget "
                 "assumes weights below 1\n",
                 wmax);

  // Validate the artifact the way the server will read it, then keep it.
  std::stringstream probe(std::ios::in | std::ios::out | std::ios::binary);
  protocol::save_model(probe, model);
  protocol::load_model(probe);
  protocol::save_model_file(o.model_out, model);
  std::fprintf(stderr, "wrote %s (%u outputs x %llu features)\n",
               o.model_out.c_str(), model.outputs(),
               static_cast<unsigned long long>(model.f()));
  return 0;
}

// ---------------------------------------------------------------- encrypt

int run_encrypt(const std::string& model_path, const std::string& keys_dir,
                const std::string& features, const std::string& out,
                uint64_t limit, uint64_t seed) {
  auto model = protocol::load_model_file(model_path);
  fpcrt::TwinContext ctx(model.params);
  auto keys = protocol::load_key_files(keys_dir, ctx, /*with_galois=*/false);
  auto be = ctx.client_backend(keys, seed, /*with_galois=*/false);

  auto fm = genomics::load_feature_matrix_file(features);
  if (fm.features() != model.f())
    throw ParamError("feature matrix has " + std::to_string(fm.features()) +
                     " columns, the model expects " +
                     std::to_string(model.f()));
  if (!fm.names.empty() && fm.names != model.feature_names)
    std::fprintf(stderr,
                 "warning: feature names differ from the model's list\n");

  util::RealMat x = fm.x;
  if (limit != 0 && limit < x.rows) {
    x.a.resize(limit * x.cols);
    x.rows = limit;
  }

  auto t0 = Clock::now();
  auto req = protocol::client_prepare(ctx, *be, x, 0);
  std::string payload = protocol::encode_infer_req(req);
  save_blob_file(out, kReqMagic, model.params, /*with_sx=*/true, payload);
  std::fprintf(stderr, "encrypted %zu rows into %zu blobs, %.1f MB (%.2fs)\n",
               x.rows, req.ct_blobs.size(),
               static_cast<double>(payload.size()) / 1048576.0, since(t0));
  return 0;
}

// ------------------------------------------------------------------ serve

std::atomic<bool> g_stop{false};

int run_serve(const std::string& model_path, const std::string& address,
              unsigned threads) {
  protocol::InferenceServer server(protocol::load_model_file(model_path),
                                   resolve_threads(threads));
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  server.start(address);
  std::fprintf(stderr,
               "serving %u outputs x %llu features on port %u "
               "(ctrl-c stops)\n",
               server.model().outputs(),
               static_cast<unsigned long long>(server.model().f()),
               server.port());
  while (!g_stop)
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  std::fprintf(stderr, "stopped\n");
  return 0;
}

// ------------------------------------------------------------------ infer

protocol::SessionAckPayload open_session(
    int fd, const protocol::SessionInitPayload& init) {
  auto reply = protocol::round_trip(
      fd, {protocol::MsgType::session_init,
           protocol::encode_session_init(init)});
  if (reply.type == protocol::MsgType::error) {
    auto e = protocol::decode_error(reply.payload);
    throw ProtocolError("server rejected the session: " + e.message);
  }
  if (reply.type != protocol::MsgType::session_ack)
    throw ProtocolError("unexpected reply to session init");
  return protocol::decode_session_ack(reply.payload);
}

std::string exchange_request(int fd, const std::string& payload) {
  auto reply = protocol::round_trip(
      fd, {protocol::MsgType::infer_req, payload});
  if (reply.type == protocol::MsgType::error) {
    auto e = protocol::decode_error(reply.payload);
    throw ProtocolError("server rejected the request: " + e.message);
  }
  if (reply.type != protocol::MsgType::infer_resp)
    throw ProtocolError("unexpected reply to inference request");
  return reply.payload;
}

void write_scores_csv(std::ostream& os,
                      const protocol::InferenceResult& res) {
  os << "row,label";
  for (size_t j = 0; j < res.scores.cols; ++j) os << ",score_" << j;
  os << '\n';
  for (size_t i = 0; i < res.scores.rows; ++i) {
    os << i << ',' << res.labels[i];
    for (size_t j = 0; j < res.scores.cols; ++j)
      os << ',' << res.scores(i, j);
    os << '\n';
  }
}

struct InferOpts {
  std::string address, keys_dir;
  std::string request;  // transport mode
  std::string model, features;
  uint64_t samples = 1;
  bool samples_set = false;
  uint64_t seed = 0;
  std::string out;
};

int run_infer(const InferOpts& o) {
  if (!o.request.empty()) {
    // transport mode: ship a prepared request, store the raw response
    if (o.out.empty())
      throw ParamError("transport mode needs --out for the response");
    fpcrt::TwinParams params;
    std::string payload = load_blob_file(o.request, kReqMagic, params, true);
    fpcrt::TwinContext ctx(params);
    fpcrt::TwinKeys keys;
    keys.gks = protocol::load_galois_key_file(
        (std::filesystem::path(o.keys_dir) / protocol::kGaloisKeyFile)
            .string(),
        ctx);

    int fd = protocol::connect_tcp(o.address);
    auto t0 = Clock::now();
    auto ack = open_session(fd, protocol::make_session_init(ctx, keys));
    double session_s = since(t0);

    auto req = protocol::decode_infer_req(payload);
    req.session_id = ack.session_id;
    auto t1 = Clock::now();
    std::string resp = exchange_request(fd, protocol::encode_infer_req(req));
    double exchange_s = since(t1);
    protocol::close_fd(fd);

    save_blob_file(o.out, kRspMagic, params, /*with_sx=*/false, resp);
    std::fprintf(stderr,
                 "session %.2fs, exchange %.2fs, %zu rows -> %s\n",
                 session_s, exchange_s,
                 static_cast<size_t>(req.rows), o.out.c_str());
    return 0;
  }

  if (o.model.empty())
    throw ParamError("infer needs --request or --model");
  auto model = protocol::load_model_file(o.model);
  fpcrt::TwinContext ctx(model.params);
  auto keys = protocol::load_key_files(o.keys_dir, ctx, /*with_galois=*/true);
  auto be = ctx.client_backend(keys, o.seed, /*with_galois=*/false);

  util::RealMat x;
  if (!o.features.empty()) {
    auto fm = genomics::load_feature_matrix_file(o.features);
    if (fm.features() != model.f())
      throw ParamError("feature matrix does not match the model width");
    x = fm.x;
    if (o.samples_set && o.samples != 0 && o.samples < x.rows) {
      x.a.resize(o.samples * x.cols);
      x.rows = o.samples;
    }
  } else {
    // demo rows with in-range magnitudes
    util::Prng rng(o.seed + 1);
    double limit = std::ldexp(
        1.0, std::min<uint32_t>(model.params.scaling.input_int_bits, 4));
    x = util::RealMat(o.samples, model.f());
    for (auto& v : x.a) v = rng.uniform_double() * limit;
  }

  int fd = protocol::connect_tcp(o.address);
  auto t0 = Clock::now();
  auto ack = open_session(fd, protocol::make_session_init(ctx, keys));
  double session_s = since(t0);
  if (ack.f != model.f() || ack.outputs != model.outputs())
    throw ProtocolError("served model shape differs from --model");

  auto t1 = Clock::now();
  auto req = protocol::client_prepare(ctx, *be, x, ack.session_id);
  double encrypt_s = since(t1);

  auto t2 = Clock::now();
  std::string resp_payload =
      exchange_request(fd, protocol::encode_infer_req(req));
  double exchange_s = since(t2);
  protocol::close_fd(fd);

  auto t3 = Clock::now();
  auto res = protocol::client_finalize(
      ctx, *be, protocol::decode_infer_resp(resp_payload));
  double decrypt_s = since(t3);

  std::fprintf(stderr,
               "%zu rows: session %.2fs, encryption %.2fs, "
               "exchange %.2fs, decryption %.2fs\n",
               x.rows, session_s, encrypt_s, exchange_s, decrypt_s);
  std::ofstream file;
  write_scores_csv(open_out(file, o.out), res);
  return 0;
}

// ---------------------------------------------------------------- decrypt

int run_decrypt(const std::string& response, const std::string& keys_dir,
                const std::string& out, uint64_t seed) {
  fpcrt::TwinParams params;
  std::string payload = load_blob_file(response, kRspMagic, params, false);
  fpcrt::TwinContext ctx(params);
  auto keys = protocol::load_key_files(keys_dir, ctx, /*with_galois=*/false);
  auto be = ctx.client_backend(keys, seed, /*with_galois=*/false);

  auto t0 = Clock::now();
  auto res = protocol::client_finalize(ctx, *be,
                                       protocol::decode_infer_resp(payload));
  std::fprintf(stderr, "decrypted %zu rows x %zu outputs (%.2fs)\n",
               res.scores.rows, res.scores.cols, since(t0));
  std::ofstream file;
  write_scores_csv(open_out(file, out), res);
  return 0;
}

// ------------------------------------------------------------------ bench

struct BenchOpts {
  std::vector<uint64_t> features;
  uint64_t samples = 1;
  uint32_t outputs = 11;
  std::string algorithm = "proposed";
  std::string preset = "paper8192";
  unsigned threads = 0;
  uint64_t seed = 1;
  std::string out;
};

void emit_phase(std::ostream& os, uint64_t f, const BenchOpts& o,
                const char* algorithm, const char* phase, double seconds,
                const matmul::OpCounters* c) {
  os << f << ',' << o.samples << ',' << o.outputs << ',' << algorithm << ','
     << phase << ',' << seconds;
  if (c)
    os << ',' << c->mul_plain_count << ',' << c->rotation_count << ','
       << c->add_count << ',' << c->ciphertexts_in << ','
       << c->ciphertexts_out;
  else
    os << ",0,0,0,0,0";
  os << '\n';
  os.flush();
}

// One row at a time through the streaming evaluator, in blocks, so the
// paper-scale shapes stay inside memory. Encryption is timed sequentially
// (the client in the protocol is single-lane); the evaluator itself runs on
// the worker pool.
void bench_proposed(std::ostream& os, const BenchOpts& o, uint64_t f,
                    fpcrt::TwinBackend& be, const util::RealMat& x,
                    const protocol::QuantizedModel& q, unsigned threads) {
  auto ew = matmul::encode_weights(be, q.weights);  // server setup, untimed
  matmul::MatmulStream stream(be, ew, q.bias, x.rows);
  const auto& cfg = be.params().scaling;

  double enc_s = 0, comp_s = 0;
  const uint64_t block = 64;
  std::vector<matmul::EncodedInputRow> enc;
  std::vector<int64_t> scaled(f);
  for (uint64_t base = 0; base < x.rows; base += block) {
    uint64_t count = std::min(block, x.rows - base);
    enc.clear();
    auto t0 = Clock::now();
    for (uint64_t i = 0; i < count; ++i) {
      for (uint64_t j = 0; j < f; ++j)
        scaled[j] = fpcrt::scale_value(x(base + i, j), cfg.s_x);
      enc.push_back(matmul::encode_input_row(be, scaled));
    }
    enc_s += since(t0);
    auto t1 = Clock::now();
    util::parallel_for(
        count, [&](size_t i) { stream.push_row(base + i, enc[i]); }, threads);
    comp_s += since(t1);
  }
  auto t2 = Clock::now();
  auto packed = stream.finish();
  comp_s += since(t2);

  auto t3 = Clock::now();
  auto raw = matmul::unpack_results(be, packed);
  std::vector<uint32_t> labels(raw.rows);
  std::vector<double> row(raw.cols);
  for (size_t i = 0; i < raw.rows; ++i) {
    for (size_t j = 0; j < raw.cols; ++j)
      row[j] = fpcrt::descale_output(raw(i, j), cfg);
    labels[i] = static_cast<uint32_t>(protocol::argmax_lowest(row));
  }
  double dec_s = since(t3);

  emit_phase(os, f, o, "proposed", "encryption", enc_s, nullptr);
  emit_phase(os, f, o, "proposed", "computation", comp_s,
             &stream.counters());
  emit_phase(os, f, o, "proposed", "decryption", dec_s, nullptr);
  std::fprintf(stderr, "f=%llu proposed: enc %.2fs comp %.2fs dec %.2fs\n",
               static_cast<unsigned long long>(f), enc_s, comp_s, dec_s);
}

// The sample-batched comparator encrypts one ciphertext per feature column;
// that encryption is inherent to the algorithm and is counted inside its
// computation phase (the encryption row is reported as 0).
void bench_baseline(std::ostream& os, const BenchOpts& o, uint64_t f,
                    fpcrt::TwinBackend& be, const util::RealMat& x,
                    const protocol::QuantizedModel& q) {
  const auto& cfg = be.params().scaling;
  util::IntMat xi(x.rows, x.cols);
  for (size_t i = 0; i < x.a.size(); ++i)
    xi.a[i] = fpcrt::scale_value(x.a[i], cfg.s_x);

  matmul::OpCounters counters;
  auto t0 = Clock::now();
  auto result = matmul::baseline_matmul(be, xi, q.weights, q.bias, &counters);
  double comp_s = since(t0);

  auto t1 = Clock::now();
  auto raw = matmul::unpack_baseline(be, result);
  std::vector<uint32_t> labels(raw.rows);
  std::vector<double> row(raw.cols);
  for (size_t i = 0; i < raw.rows; ++i) {
    for (size_t j = 0; j < raw.cols; ++j)
      row[j] = fpcrt::descale_output(raw(i, j), cfg);
    labels[i] = static_cast<uint32_t>(protocol::argmax_lowest(row));
  }
  double dec_s = since(t1);

  emit_phase(os, f, o, "baseline", "encryption", 0.0, nullptr);
  emit_phase(os, f, o, "baseline", "computation", comp_s, &counters);
  emit_phase(os, f, o, "baseline", "decryption", dec_s, nullptr);
  std::fprintf(stderr, "f=%llu baseline: comp %.2fs dec %.2fs\n",
               static_cast<unsigned long long>(f), comp_s, dec_s);
}

int run_bench(const BenchOpts& o) {
  fpcrt::TwinParams params = preset_params(o.preset);
  fpcrt::TwinContext ctx(params);
  util::Prng rng(o.seed);
  auto keys = ctx.keygen(rng);
  auto be = ctx.client_backend(keys, o.seed + 1, /*with_galois=*/true);
  unsigned threads = resolve_threads(o.threads);

  std::ofstream file;
  std::ostream& os = open_out(file, o.out);
  os << "f,samples,outputs,algorithm,phase,seconds,mul_plain,rotations,adds,"
        "ciphertexts_in,ciphertexts_out\n";

  for (uint64_t f : o.features) {
    auto rep = fpcrt::capacity_check(f, params.scaling,
                                     std::vector<uint64_t>{params.t.t0,
                                                           params.t.t1});
    if (!rep.ok)
      throw RangeError("f=" + std::to_string(f) + " needs " +
                       std::to_string(rep.required_bits) +
                       " result bits, capacity is " +
                       std::to_string(rep.capacity_bits));

    protocol::Model model;
    model.params = params;
    model.weights = util::RealMat(o.outputs, f);
    model.bias.resize(o.outputs);
    for (auto& v : model.weights.a) v = rng.uniform_double() * 1.98 - 0.99;
    for (auto& v : model.bias) v = rng.uniform_double() * 4.0 - 2.0;
    auto q = protocol::quantize_model(model);

    double limit =
        std::ldexp(1.0, std::min<uint32_t>(params.scaling.input_int_bits, 4));
    util::RealMat x(o.samples, f);
    for (auto& v : x.a) v = rng.uniform_double() * limit;

    if (o.algorithm != "baseline")
      bench_proposed(os, o, f, *be, x, q, threads);
    if (o.algorithm != "proposed") bench_baseline(os, o, f, *be, x, q);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privacy-preserving cancer type inference"};
  app.require_subcommand(1);
  auto preset_check = CLI::IsMember({"paper8192", "test32"});

  // keygen
  auto* kg = app.add_subcommand("keygen", "generate client key files");
  std::string kg_preset = "paper8192", kg_dir;
  uint64_t kg_seed = 0;
  kg->add_option("--params-preset", kg_preset)->check(preset_check);
  kg->add_option("--keys-dir,--out-dir", kg_dir, "directory for the key files")
      ->required();
  kg->add_option("--seed", kg_seed, "0 seeds from system entropy");

  // encode-features
  auto* ef = app.add_subcommand("encode-features",
                                "mutation tables to a feature matrix");
  EncodeOpts eo;
  ef->add_option("--snv", eo.snv, "SNV tsv");
  ef->add_option("--cnv", eo.cnv, "CNV tsv");
  ef->add_option("--labels", eo.labels, "label tsv");
  ef->add_flag("--synthetic", eo.synthetic, "generate a synthetic cohort");
  ef->add_option("--classes", eo.spec.classes);
  ef->add_option("--genes", eo.spec.genes);
  ef->add_option("--patients", eo.spec.patients);
  ef->add_option("--drivers-per-class", eo.spec.drivers_per_class);
  ef->add_option("--signal", eo.spec.signal);
  ef->add_option("--snv-rate", eo.spec.background_snv_rate);
  ef->add_option("--cnv-rate", eo.spec.background_cnv_rate);
  ef->add_option("--seed", eo.spec.seed);
  ef->add_option("--emit-tsv", eo.emit_tsv,
                 "also write the (synthetic) tsv tables here");
  ef->add_option("--mode", eo.mode)->check(CLI::IsMember({"presence",
                                                          "impact"}));
  ef->add_option("--top-genes", eo.top_genes, "per-class SNV gene cut");
  ef->add_option("--out", eo.out, "feature matrix output")->required();
  ef->add_option("--csv", eo.csv, "also export csv");
  ef->add_option("--threads", eo.threads);

  // select-features
  auto* sf = app.add_subcommand("select-features",
                                "chi-square feature selection");
  std::string sf_in, sf_out, sf_csv;
  size_t sf_k = 0;
  unsigned sf_threads = 0;
  sf->add_option("--features", sf_in, "feature matrix input")->required();
  sf->add_option("--top-k", sf_k)->required();
  sf->add_option("--out", sf_out)->required();
  sf->add_option("--scores-csv", sf_csv, "per-feature scores");
  sf->add_option("--threads", sf_threads);

  // train
  auto* tr = app.add_subcommand("train", "fit the classifier, write a model");
  TrainOpts to;
  tr->add_option("--features", to.features)->required();
  tr->add_option("--model", to.model_out, "model file output")->required();
  tr->add_option("--lambda", to.lambda,
                 "l1 strength; negative runs cross-validation");
  tr->add_option("--folds", to.folds);
  tr->add_option("--epochs", to.epochs);
  tr->add_option("--cv-epochs", to.cv_epochs, "epoch cap inside cv");
  tr->add_option("--test-fraction", to.test_fraction);
  tr->add_option("--seed", to.seed);
  tr->add_option("--params-preset", to.preset)->check(preset_check);
  tr->add_option("--metrics", to.metrics, "metrics json output");
  tr->add_option("--roc", to.roc, "roc csv output");

  // encrypt
  auto* en = app.add_subcommand("encrypt", "encrypt feature rows offline");
  std::string en_model, en_keys, en_features, en_out;
  uint64_t en_limit = 0, en_seed = 0;
  en->add_option("--model", en_model)->required();
  en->add_option("--keys-dir", en_keys)->required();
  en->add_option("--features", en_features, "feature matrix input")
      ->required();
  en->add_option("--out", en_out, "request file output")->required();
  en->add_option("--limit", en_limit, "encrypt only the first N rows");
  en->add_option("--seed", en_seed);

  // serve
  auto* sv = app.add_subcommand("serve", "run the inference server");
  std::string sv_model, sv_address = "127.0.0.1:7700";
  unsigned sv_threads = 0;
  sv->add_option("--model", sv_model)->required();
  sv->add_option("--address", sv_address, "host:port, port 0 picks one");
  sv->add_option("--threads", sv_threads);

  // infer
  auto* in = app.add_subcommand("infer", "run a request against a server");
  InferOpts io;
  in->add_option("--address", io.address)->required();
  in->add_option("--keys-dir", io.keys_dir)->required();
  in->add_option("--request", io.request,
                 "prepared request file (transport mode)");
  in->add_option("--model", io.model, "model file (self-contained mode)");
  in->add_option("--features", io.features, "feature matrix to send");
  in->add_option("--samples", io.samples,
                 "row count: random demo rows, or a cap on --features");
  in->add_option("--seed", io.seed);
  in->add_option("--out", io.out,
                 "response file (transport) or scores csv (self-contained)");

  // decrypt
  auto* de = app.add_subcommand("decrypt", "decrypt a stored response");
  std::string de_resp, de_keys, de_out;
  uint64_t de_seed = 0;
  de->add_option("--response", de_resp)->required();
  de->add_option("--keys-dir", de_keys)->required();
  de->add_option("--out", de_out, "scores csv; default stdout");
  de->add_option("--seed", de_seed);

  // bench
  auto* be = app.add_subcommand("bench", "time the encrypted pipeline");
  BenchOpts bo;
  be->add_option("--features", bo.features, "feature counts, comma separated")
      ->required()
      ->delimiter(',');
  be->add_option("--samples", bo.samples);
  be->add_option("--outputs", bo.outputs);
  be->add_option("--algorithm", bo.algorithm)
      ->check(CLI::IsMember({"proposed", "baseline", "both"}));
  be->add_option("--params-preset", bo.preset)->check(preset_check);
  be->add_option("--threads", bo.threads);
  be->add_option("--seed", bo.seed);
  be->add_option("--out", bo.out, "csv output; default stdout");

  CLI11_PARSE(app, argc, argv);
  io.samples_set = in->count("--samples") > 0;

  try {
    if (*kg) return run_keygen(kg_preset, kg_dir, kg_seed);
    if (*ef) return run_encode(eo);
    if (*sf) return run_select(sf_in, sf_k, sf_out, sf_csv, sf_threads);
    if (*tr) return run_train(to);
    if (*en)
      return run_encrypt(en_model, en_keys, en_features, en_out, en_limit,
                         en_seed);
    if (*sv) return run_serve(sv_model, sv_address, sv_threads);
    if (*in) return run_infer(io);
    if (*de) return run_decrypt(de_resp, de_keys, de_out, de_seed);
    if (*be) return run_bench(bo);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "heinfer: %s\n", e.what());
    return 1;
  }
  return 0;
}
