// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hei/genomics/features.hpp"
#include "hei/genomics/records.hpp"
#include "hei/genomics/synthetic.hpp"
#include "hei/genomics/train.hpp"
#include "hei/util/errors.hpp"
#include "hei/util/rng.hpp"

using namespace hei;
using namespace hei::genomics;

namespace {

FeatureMatrix make_matrix(util::RealMat x, std::vector<uint32_t> labels,
                          uint32_t classes) {
  FeatureMatrix f;
  f.x = std::move(x);
  f.labels = std::move(labels);
  f.classes = classes;
  f.names.resize(f.x.cols);
  f.sample_ids.resize(f.x.rows);
  for (size_t j = 0; j < f.x.cols; ++j) f.names[j] = "f" + std::to_string(j);
  for (size_t i = 0; i < f.x.rows; ++i)
    f.sample_ids[i] = "s" + std::to_string(i);
  return f;
}

// Straight from the definition: observed class sums against sums expected
// from class shares alone.
double chi2_oracle(std::span<const double> v, std::span<const uint32_t> y,
                   uint32_t classes) {
  std::vector<double> observed(classes, 0.0);
  std::vector<size_t> count(classes, 0);
  double total = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    observed[y[i]] += v[i];
    count[y[i]]++;
    total += v[i];
  }
  if (total == 0.0) return 0.0;
  double score = 0;
  for (uint32_t k = 0; k < classes; ++k) {
    double expected =
        static_cast<double>(count[k]) / static_cast<double>(v.size()) * total;
    if (expected == 0.0) continue;
    double d = observed[k] - expected;
    score += d * d / expected;
  }
  return score;
}

}  // namespace

TEST_CASE("snv and cnv encodings") {
  std::vector<std::string> genes{"A", "B", "C"};

  SnvRecord del{"s", "A", SiftClass::deleterious, 0.9, ImpactClass::high};
  SnvRecord tol{"s", "A", SiftClass::tolerated_lc, 1.0, ImpactClass::low};
  SnvRecord other{"s", "Z", SiftClass::deleterious, 1.0, ImpactClass::high};

  auto v = encode_snv(std::vector{del}, genes, SnvMode::impact);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == doctest::Approx(0.9));  // 1.0 * 0.9 * 1.0
  CHECK(v[1] == 0.0);

  v = encode_snv(std::vector{tol}, genes, SnvMode::impact);
  CHECK(v[0] == doctest::Approx(0.05));  // 0.5 * 1.0 * 0.1

  // several rows on one gene add up
  v = encode_snv(std::vector{del, tol}, genes, SnvMode::impact);
  CHECK(v[0] == doctest::Approx(0.95));

  // presence mode flattens everything to 1
  v = encode_snv(std::vector{del, tol}, genes, SnvMode::presence);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 0.0);

  // the moderate/modifier pair is deliberately not ordered by the enum
  SnvRecord mod{"s", "B", SiftClass::deleterious, 1.0, ImpactClass::moderate};
  SnvRecord mfr{"s", "C", SiftClass::deleterious, 1.0, ImpactClass::modifier};
  v = encode_snv(std::vector{mod, mfr}, genes, SnvMode::impact);
  CHECK(v[1] == doctest::Approx(0.4));
  CHECK(v[2] == doctest::Approx(0.7));

  // records for genes outside the list are dropped
  v = encode_snv(std::vector{other}, genes, SnvMode::impact);
  CHECK(v == std::vector<double>{0.0, 0.0, 0.0});

  // copy numbers map -2..2 onto 0..4, missing gene sits at 2
  std::vector<CnvRecord> cnv{{"s", "A", -2}, {"s", "C", 1}};
  auto c = encode_cnv(cnv, genes);
  CHECK(c == std::vector<double>{0.0, 2.0, 3.0});
  for (int copy = -2; copy <= 2; ++copy) {
    auto one = encode_cnv(std::vector<CnvRecord>{{"s", "B", copy}}, genes);
    CHECK(one[1] == static_cast<double>(copy + 2));
  }
  CHECK_THROWS_AS(
      encode_cnv(std::vector<CnvRecord>{{"s", "B", 3}}, genes), ParamError);
}

TEST_CASE("gene ranking by per-class mutation counts") {
  LabelMap labels{{"p0", 0}, {"p1", 0}, {"p2", 1}};
  auto snv = [](std::string sample, std::string gene) {
    return SnvRecord{std::move(sample), std::move(gene),
                     SiftClass::tolerated, 0.5, ImpactClass::low};
  };
  std::vector<SnvRecord> recs{
      snv("p0", "A"), snv("p0", "A"), snv("p1", "A"),  // class 0: A x3
      snv("p1", "B"),                                  // class 0: B x1
      snv("p1", "D"),                                  // class 0: D x1
      snv("p2", "C"), snv("p2", "C"),                  // class 1: C x2
  };

  auto top1 = rank_genes_by_snv_frequency(recs, labels, 1);
  CHECK(top1 == std::vector<std::string>{"A", "C"});

  // count tie between B and D breaks by symbol
  auto top2 = rank_genes_by_snv_frequency(recs, labels, 2);
  CHECK(top2 == std::vector<std::string>{"A", "B", "C"});

  auto all = rank_genes_by_snv_frequency(recs, labels);
  CHECK(all == std::vector<std::string>{"A", "B", "C", "D"});

  CHECK_THROWS_AS(rank_genes_by_snv_frequency({}, labels), ParamError);
  std::vector<SnvRecord> orphan{snv("nobody", "A")};
  CHECK_THROWS_AS(rank_genes_by_snv_frequency(orphan, labels), ParamError);

  std::vector<CnvRecord> cnv{{"p0", "Z", 1}, {"p1", "A", -1}, {"p2", "Z", 2}};
  CHECK(cnv_gene_universe(cnv) == std::vector<std::string>{"A", "Z"});
  CHECK(cnv_gene_universe({}).empty());
}

TEST_CASE("chi2 hand values and conventions") {
  // [1,1,0,0] split over two balanced classes: expected 1 per class
  auto f = make_matrix(util::RealMat(4, 1), {0, 0, 1, 1}, 2);
  f.x(0, 0) = 1;
  f.x(1, 0) = 1;
  auto s = chi2_scores(f);
  CHECK(s[0] == doctest::Approx(2.0));

  // a constant column carries no class information
  for (size_t i = 0; i < 4; ++i) f.x(i, 0) = 3.5;
  CHECK(chi2_scores(f)[0] == doctest::Approx(0.0));

  // all-zero column scores 0 by convention
  for (size_t i = 0; i < 4; ++i) f.x(i, 0) = 0.0;
  CHECK(chi2_scores(f)[0] == 0.0);

  f.x(2, 0) = -0.25;
  CHECK_THROWS_AS(chi2_scores(f), ParamError);
  CHECK_THROWS_AS(chi2_scores(f, 4), ParamError);  // through the worker pool
}

TEST_CASE("chi2 exhaustive against the contingency definition") {
  // every 2-class labeling and every feature column over {0,1,2} values,
  // up to 8 samples
  for (size_t n = 2; n <= 8; ++n) {
    size_t n_features = 1;
    for (size_t i = 0; i < n; ++i) n_features *= 3;

    util::RealMat x(n, n_features);
    for (size_t j = 0; j < n_features; ++j) {
      size_t digits = j;
      for (size_t i = 0; i < n; ++i) {
        x(i, j) = static_cast<double>(digits % 3);
        digits /= 3;
      }
    }

    for (uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
      std::vector<uint32_t> y(n);
      for (size_t i = 0; i < n; ++i) y[i] = (mask >> i) & 1;
      auto f = make_matrix(x, y, 2);
      auto scores = chi2_scores(f, 1);

      size_t mismatches = 0;
      std::vector<double> col(n);
      for (size_t j = 0; j < n_features; ++j) {
        for (size_t i = 0; i < n; ++i) col[i] = x(i, j);
        double want = chi2_oracle(col, y, 2);
        if (std::abs(scores[j] - want) > 1e-9 * std::max(1.0, want))
          ++mismatches;
      }
      CHECK(mismatches == 0);
    }
  }
}

TEST_CASE("top-k selection") {
  std::vector<double> s{3.0, 1.0, 2.0};
  CHECK(select_top_k(s, 2) == std::vector<size_t>{0, 2});
  CHECK(select_top_k(s, 3) == std::vector<size_t>{0, 1, 2});
  CHECK(select_top_k(s, 0).empty());
  CHECK_THROWS_AS(select_top_k(s, 4), ParamError);

  // equal scores keep the lower index
  std::vector<double> ties{5.0, 7.0, 7.0, 5.0};
  CHECK(select_top_k(ties, 1) == std::vector<size_t>{1});
  CHECK(select_top_k(ties, 3) == std::vector<size_t>{0, 1, 2});
}

TEST_CASE("feature matrix assembly") {
  LabelMap labels{{"p0", 0}, {"p1", 1}, {"p2", 0}};
  std::vector<SnvRecord> snv{
      {"p0", "A", SiftClass::deleterious, 1.0, ImpactClass::high},
      {"p1", "B", SiftClass::tolerated, 1.0, ImpactClass::low},
      {"p1", "B", SiftClass::deleterious, 0.5, ImpactClass::high},
  };
  std::vector<CnvRecord> cnv{{"p0", "B", -1}, {"p1", "C", 2}};
  std::vector<std::string> snv_genes{"A", "B"};
  std::vector<std::string> cnv_genes{"B", "C"};

  auto f = build_feature_matrix(snv, cnv, labels, snv_genes, cnv_genes,
                                SnvMode::impact);
  CHECK(f.names ==
        std::vector<std::string>{"snv:A", "snv:B", "cnv:B", "cnv:C"});
  CHECK(f.sample_ids == std::vector<std::string>{"p0", "p1", "p2"});
  CHECK(f.labels == std::vector<uint32_t>{0, 1, 0});
  CHECK(f.classes == 2);
  REQUIRE(f.samples() == 3);
  REQUIRE(f.features() == 4);

  CHECK(f.x(0, 0) == doctest::Approx(1.0));    // p0 snv:A
  CHECK(f.x(0, 1) == 0.0);                     // p0 snv:B
  CHECK(f.x(0, 2) == 1.0);                     // p0 cnv:B = -1 + 2
  CHECK(f.x(0, 3) == 2.0);                     // p0 cnv:C absent
  CHECK(f.x(1, 1) == doctest::Approx(0.525));  // 0.25*0.1 + 1.0*0.5*1.0
  CHECK(f.x(1, 3) == 4.0);                     // p1 cnv:C = 2 + 2
  CHECK(f.x(2, 0) == 0.0);                     // p2 has no records at all
  CHECK(f.x(2, 3) == 2.0);

  // unknown sample in either table is an error
  std::vector<SnvRecord> bad_snv{snv[0]};
  bad_snv[0].sample_id = "ghost";
  CHECK_THROWS_AS(build_feature_matrix(bad_snv, cnv, labels, snv_genes,
                                       cnv_genes, SnvMode::impact),
                  ParamError);

  // gene lists must come in sorted
  std::vector<std::string> unsorted{"B", "A"};
  CHECK_THROWS_AS(build_feature_matrix(snv, cnv, labels, unsorted, cnv_genes,
                                       SnvMode::impact),
                  ParamError);

  // threaded assembly matches the serial one exactly
  auto f4 = build_feature_matrix(snv, cnv, labels, snv_genes, cnv_genes,
                                 SnvMode::impact, 4);
  CHECK(f4.x == f.x);
  CHECK(f4.labels == f.labels);
}

TEST_CASE("row and column selection") {
  auto f = make_matrix(util::RealMat(3, 3), {0, 1, 0}, 2);
  for (size_t i = 0; i < 3; ++i)
    for (size_t j = 0; j < 3; ++j) f.x(i, j) = static_cast<double>(10 * i + j);

  std::vector<size_t> cols{0, 2};
  auto fc = select_columns(f, cols);
  CHECK(fc.features() == 2);
  CHECK(fc.names == std::vector<std::string>{"f0", "f2"});
  CHECK(fc.x(1, 1) == 12.0);
  CHECK(fc.labels == f.labels);

  std::vector<size_t> rows{2, 0};
  auto fr = select_rows(f, rows);
  CHECK(fr.samples() == 2);
  CHECK(fr.sample_ids == std::vector<std::string>{"s2", "s0"});
  CHECK(fr.labels == std::vector<uint32_t>{0, 0});
  CHECK(fr.x(0, 1) == 21.0);
  CHECK(fr.classes == 2);

  std::vector<size_t> oob{5};
  CHECK_THROWS_AS(select_columns(f, oob), ParamError);
  CHECK_THROWS_AS(select_rows(f, oob), ParamError);
}

TEST_CASE("tsv ingestion and emission") {
  const std::string snv_text =
      "sample_id\tgene\tsift_class\tstrength\timpact_class\n"
      "p0\tTP53\tdeleterious\t0.9\thigh\n"
      "\n"
      "p1\tg\xC3\xA8ne\ttolerated_lc\t1.5\tmodifier\r\n"
      "p1\tBRCA1\tdeleterious_lc\t-0.25\tmoderate\n";
  std::istringstream in(snv_text);
  auto recs = load_snv_tsv(in);
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].sample_id == "p0");
  CHECK(recs[0].sift == SiftClass::deleterious);
  CHECK(recs[0].impact == ImpactClass::high);
  CHECK(recs[0].strength == doctest::Approx(0.9));
  CHECK(recs[1].gene == "g\xC3\xA8ne");
  CHECK(recs[1].strength == 1.0);  // clamped
  CHECK(recs[2].strength == 0.0);  // clamped
  CHECK(recs[2].impact == ImpactClass::moderate);

  std::ostringstream out;
  save_snv_tsv(out, recs);
  std::istringstream back(out.str());
  CHECK(load_snv_tsv(back) == recs);

  auto reject_snv = [](const std::string& body) {
    std::istringstream is(
        "sample_id\tgene\tsift_class\tstrength\timpact_class\n" + body);
    CHECK_THROWS_AS(load_snv_tsv(is), CodecError);
  };
  reject_snv("p0\tA\tDeleterious\t0.5\thigh\n");   // case matters
  reject_snv("p0\tA\tdeleterious\t0.5\tsevere\n"); // unknown impact
  reject_snv("p0\tA\tdeleterious\tx\thigh\n");     // not a number
  reject_snv("p0\tA\tdeleterious\t0.5.1\thigh\n"); // trailing junk
  reject_snv("p0\tA\tdeleterious\tnan\thigh\n");   // non-finite
  reject_snv("p0\tA\tdeleterious\t0.5\n");         // missing column
  reject_snv("p0\tA\tdeleterious\t0.5\thigh\textra\n");
  reject_snv("\tA\tdeleterious\t0.5\thigh\n");     // empty sample id
  reject_snv("p0\t\tdeleterious\t0.5\thigh\n");    // empty gene
  {
    std::istringstream is("sample\tgene\tsift\tstrength\timpact\np0\n");
    CHECK_THROWS_AS(load_snv_tsv(is), CodecError);  // wrong header
  }

  std::istringstream cnv_in(
      "sample_id\tgene\tcopy_number\n"
      "p0\tA\t-2\n"
      "p1\tB\t2\n");
  auto cnv = load_cnv_tsv(cnv_in);
  REQUIRE(cnv.size() == 2);
  CHECK(cnv[0].copy_number == -2);
  std::ostringstream cnv_out;
  save_cnv_tsv(cnv_out, cnv);
  std::istringstream cnv_back(cnv_out.str());
  CHECK(load_cnv_tsv(cnv_back) == cnv);

  auto reject_cnv = [](const std::string& body) {
    std::istringstream is("sample_id\tgene\tcopy_number\n" + body);
    CHECK_THROWS_AS(load_cnv_tsv(is), CodecError);
  };
  reject_cnv("p0\tA\t3\n");
  reject_cnv("p0\tA\t-3\n");
  reject_cnv("p0\tA\t1.5\n");

  std::istringstream lab_in(
      "sample_id\tlabel\n"
      "p1\t4\n"
      "p0\t0\n"
      "p2\t65535\n");
  auto labels = load_labels_tsv(lab_in);
  REQUIRE(labels.size() == 3);
  CHECK(labels.at("p0") == 0);
  CHECK(labels.at("p1") == 4);
  CHECK(labels.begin()->first == "p0");  // map iterates in id order
  std::ostringstream lab_out;
  save_labels_tsv(lab_out, labels);
  std::istringstream lab_back(lab_out.str());
  CHECK(load_labels_tsv(lab_back) == labels);

  auto reject_lab = [](const std::string& body) {
    std::istringstream is("sample_id\tlabel\n" + body);
    CHECK_THROWS_AS(load_labels_tsv(is), CodecError);
  };
  reject_lab("p0\t65536\n");
  reject_lab("p0\t-1\n");
  reject_lab("p0\t2\np0\t2\n");  // duplicate sample

  // header-only files are empty, not errors
  std::istringstream empty_snv(
      "sample_id\tgene\tsift_class\tstrength\timpact_class\n");
  CHECK(load_snv_tsv(empty_snv).empty());
}

TEST_CASE("feature matrix container roundtrip") {
  auto f = make_matrix(util::RealMat(3, 2), {0, 2, 1}, 3);
  f.names = {"snv:TP53", "cnv:g\xC3\xA8ne"};
  f.sample_ids = {"p0", "p1", "p2"};
  util::Prng rng(11);
  for (auto& v : f.x.a) v = rng.uniform_double() * 4;

  std::ostringstream os;
  save_feature_matrix(os, f);
  std::string bytes = os.str();
  std::istringstream is(bytes);
  auto g = load_feature_matrix(is);
  CHECK(g.x == f.x);
  CHECK(g.names == f.names);
  CHECK(g.sample_ids == f.sample_ids);
  CHECK(g.labels == f.labels);
  CHECK(g.classes == f.classes);

  const std::string path = "/tmp/hei_fmtx_test.bin";
  save_feature_matrix_file(path, f);
  auto h = load_feature_matrix_file(path);
  CHECK(h.x == f.x);
  CHECK(h.names == f.names);

  auto reject = [&](std::string b) {
    std::istringstream bad(std::move(b));
    CHECK_THROWS_AS(load_feature_matrix(bad), CodecError);
  };
  {
    std::string b = bytes;
    b[0] = 'X';
    reject(b);
  }
  {
    std::string b = bytes;
    b[4] = 9;  // unsupported version
    reject(b);
  }
  {
    std::string b = bytes;
    std::memset(b.data() + 6, 0, 8);  // rows = 0
    reject(b);
  }
  {
    std::string b = bytes;
    std::memset(b.data() + 22, 0, 4);  // classes = 0 under live labels
    reject(b);
  }
  reject(bytes.substr(0, bytes.size() / 2));
  reject(bytes.substr(0, 3));

  std::ostringstream csv;
  write_feature_csv(csv, f);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "sample_id,label,snv:TP53,cnv:g\xC3\xA8ne");
  size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(0.5, 0.7) == 0.0);
  CHECK(soft_threshold(-0.5, 0.7) == 0.0);
  CHECK(soft_threshold(1.0, 0.3) == doctest::Approx(0.7));
  CHECK(soft_threshold(-1.0, 0.3) == doctest::Approx(-0.7));
  CHECK(soft_threshold(0.7, 0.7) == 0.0);
  CHECK(soft_threshold(2.0, 0.0) == 2.0);
}

TEST_CASE("smooth gradient matches finite differences") {
  util::Prng rng(5);
  const size_t n = 6, d = 4;
  const uint32_t k = 3;
  auto f = make_matrix(util::RealMat(n, d), {0, 1, 2, 0, 1, 2}, k);
  for (auto& v : f.x.a) v = rng.gaussian();

  util::RealMat w(k, d);
  std::vector<double> b(k);
  for (auto& v : w.a) v = 0.3 * rng.gaussian();
  for (auto& v : b) v = 0.3 * rng.gaussian();

  util::RealMat gw;
  std::vector<double> gb;
  lr_smooth_gradient(f.x, f.labels, k, w, b, gw, gb);
  REQUIRE(gw.rows == k);
  REQUIRE(gw.cols == d);

  const double h = 1e-6;
  auto check_close = [](double got, double want) {
    CHECK(std::abs(got - want) <= 1e-5 * std::max(1.0, std::abs(want)));
  };
  for (size_t i = 0; i < w.a.size(); ++i) {
    util::RealMat wp = w, wm = w;
    wp.a[i] += h;
    wm.a[i] -= h;
    double fd = (lr_objective(f.x, f.labels, k, wp, b, 0.0) -
                 lr_objective(f.x, f.labels, k, wm, b, 0.0)) /
                (2 * h);
    check_close(gw.a[i], fd);
  }
  for (uint32_t c = 0; c < k; ++c) {
    auto bp = b, bm = b;
    bp[c] += h;
    bm[c] -= h;
    double fd = (lr_objective(f.x, f.labels, k, w, bp, 0.0) -
                 lr_objective(f.x, f.labels, k, w, bm, 0.0)) /
                (2 * h);
    check_close(gb[c], fd);
  }
}

TEST_CASE("training descends and converges on separable data") {
  // three well-separated clusters in 2d
  util::Prng rng(9);
  const size_t per = 10;
  auto f = make_matrix(util::RealMat(3 * per, 2), {}, 3);
  f.labels.resize(3 * per);
  const double cx[3] = {4.0, -4.0, 0.0};
  const double cy[3] = {0.0, 0.0, 4.0};
  for (size_t i = 0; i < 3 * per; ++i) {
    uint32_t c = static_cast<uint32_t>(i % 3);
    f.labels[i] = c;
    f.x(i, 0) = cx[c] + 0.3 * rng.gaussian();
    f.x(i, 1) = cy[c] + 0.3 * rng.gaussian();
  }

  util::RealMat w0(3, 2);
  std::vector<double> b0(3, 0.0);
  double start = lr_objective(f.x, f.labels, 3, w0, b0, 0.0);
  CHECK(start == doctest::Approx(std::log(3.0)));

  TrainOptions few;
  few.epochs = 3;
  auto m3 = train_lr_l1(f, 0.0, few);
  auto m = train_lr_l1(f, 0.0);
  CHECK(m3.final_objective <= start + 1e-12);
  CHECK(m.final_objective <= m3.final_objective + 1e-12);
  CHECK(m.epochs_run > 0);

  // separable data trains to zero error with a flat gradient
  auto pred = predict(f, m);
  size_t hits = 0;
  for (size_t i = 0; i < pred.size(); ++i) hits += pred[i] == f.labels[i];
  CHECK(hits == f.samples());

  util::RealMat gw;
  std::vector<double> gb;
  lr_smooth_gradient(f.x, f.labels, 3, m.w, m.b, gw, gb);
  double gnorm = 0;
  for (double v : gw.a) gnorm += v * v;
  for (double v : gb) gnorm += v * v;
  CHECK(std::sqrt(gnorm) < 1e-4);

  CHECK(m.feature_names == f.names);
  CHECK(m.lambda == 0.0);
}

TEST_CASE("heavy l1 collapses to the majority class") {
  util::Prng rng(21);
  auto f = make_matrix(util::RealMat(9, 3), {0, 0, 0, 0, 0, 0, 1, 1, 2}, 3);
  for (auto& v : f.x.a) v = rng.gaussian();

  auto m = train_lr_l1(f, 50.0);
  for (double v : m.w.a) CHECK(v == 0.0);
  auto pred = predict(f, m);
  for (uint32_t p : pred) CHECK(p == 0);

  // bias still learned the priors
  CHECK(m.b[0] > m.b[1]);
  CHECK(m.b[1] > m.b[2]);
}

TEST_CASE("trainer input validation") {
  auto f = make_matrix(util::RealMat(4, 2), {0, 1, 0, 1}, 2);
  CHECK_THROWS_AS(train_lr_l1(f, -0.1), ParamError);

  auto one_class = f;
  one_class.classes = 1;
  one_class.labels = {0, 0, 0, 0};
  CHECK_THROWS_AS(train_lr_l1(one_class, 0.0), ParamError);

  auto bad_label = f;
  bad_label.labels = {0, 1, 2, 0};
  CHECK_THROWS_AS(train_lr_l1(bad_label, 0.0), ParamError);

  auto bad_value = f;
  bad_value.x(1, 1) = std::nan("");
  CHECK_THROWS_AS(train_lr_l1(bad_value, 0.0), ParamError);

  auto empty = make_matrix(util::RealMat(), {}, 2);
  CHECK_THROWS_AS(train_lr_l1(empty, 0.0), ParamError);

  auto m = train_lr_l1(f, 0.0);
  auto wrong_width = make_matrix(util::RealMat(2, 3), {0, 1}, 2);
  CHECK_THROWS_AS(predict(wrong_width, m), ParamError);
}

TEST_CASE("prediction ties go to the lowest class") {
  TrainedModel m;
  m.w = util::RealMat(3, 2);  // all zero
  m.b = {0.0, 0.0, 0.0};
  auto f = make_matrix(util::RealMat(2, 2), {0, 1}, 3);
  f.x(0, 0) = 1.0;
  f.x(1, 1) = -2.0;
  auto p = predict(f, m);
  CHECK(p == std::vector<uint32_t>{0, 0});

  auto scores = predict_scores(f, m);
  for (size_t i = 0; i < 2; ++i)
    for (size_t j = 0; j < 3; ++j)
      CHECK(scores(i, j) == doctest::Approx(1.0 / 3));
}

TEST_CASE("metrics on perfect and degenerate predictions") {
  std::vector<uint32_t> truth{0, 1, 2, 0};
  util::RealMat scores(4, 3);
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 3; ++j)
      scores(i, j) = (j == truth[i]) ? 0.9 : 0.05;

  auto m = evaluate(truth, truth, scores);
  CHECK(m.accuracy == 1.0);
  CHECK(m.micro_auc == doctest::Approx(1.0));
  REQUIRE(m.per_class.size() == 3);
  for (const auto& c : m.per_class) {
    CHECK(c.precision == 1.0);
    CHECK(c.recall == 1.0);
    CHECK(c.f1 == 1.0);
    CHECK(c.auc == doctest::Approx(1.0));
  }

  // class 1 never appears and is never predicted: all its counters are 0/0
  std::vector<uint32_t> only0{0, 0, 0};
  util::RealMat s2(3, 2);
  for (size_t i = 0; i < 3; ++i) {
    s2(i, 0) = 0.8;
    s2(i, 1) = 0.2;
  }
  auto m2 = evaluate(only0, only0, s2);
  CHECK(m2.accuracy == 1.0);
  CHECK(m2.per_class[1].precision == 0.0);
  CHECK(m2.per_class[1].recall == 0.0);
  CHECK(m2.per_class[1].f1 == 0.0);
  CHECK(m2.per_class[1].auc == 0.0);  // no positives to rank
  CHECK(m2.per_class[0].auc == 0.0);  // no negatives either
  CHECK(m2.micro_auc == doctest::Approx(1.0));  // pooled cells still split

  std::vector<uint32_t> short_pred{0};
  CHECK_THROWS_AS(evaluate(short_pred, truth, scores), ParamError);
}

TEST_CASE("auc by hand and under ties") {
  // 3 of 4 pairs ordered correctly -> 0.75
  std::vector<uint32_t> truth{0, 1, 0, 1};
  util::RealMat scores(4, 2);
  const double class0[4] = {0.9, 0.8, 0.7, 0.1};
  for (size_t i = 0; i < 4; ++i) {
    scores(i, 0) = class0[i];
    scores(i, 1) = 1.0 - class0[i];
  }
  auto m = evaluate(truth, truth, scores);  // pred irrelevant to auc
  CHECK(m.per_class[0].auc == doctest::Approx(0.75));
  CHECK(m.per_class[1].auc == doctest::Approx(0.75));

  // one flat score level collapses to the diagonal
  util::RealMat flat(4, 2);
  for (auto& v : flat.a) v = 0.5;
  auto mf = evaluate(truth, truth, flat);
  CHECK(mf.per_class[0].auc == doctest::Approx(0.5));
  CHECK(mf.micro_auc == doctest::Approx(0.5));
}

TEST_CASE("auc of random scores sits near one half") {
  util::Prng rng(33);
  const size_t n = 10000;
  std::vector<uint32_t> truth(n), pred(n);
  util::RealMat scores(n, 2);
  for (size_t i = 0; i < n; ++i) {
    truth[i] = i % 2;
    double s = rng.uniform_double();
    scores(i, 0) = s;
    scores(i, 1) = 1.0 - s;
    pred[i] = s >= 0.5 ? 0 : 1;
  }
  auto m = evaluate(pred, truth, scores);
  CHECK(m.accuracy > 0.45);
  CHECK(m.accuracy < 0.55);
  CHECK(m.per_class[0].auc > 0.45);
  CHECK(m.per_class[0].auc < 0.55);
  CHECK(m.micro_auc > 0.45);
  CHECK(m.micro_auc < 0.55);
}

TEST_CASE("metrics serialization") {
  std::vector<uint32_t> truth{0, 1, 1, 0};
  std::vector<uint32_t> pred{0, 1, 0, 0};
  util::RealMat scores(4, 2);
  const double class0[4] = {0.9, 0.2, 0.6, 0.7};
  for (size_t i = 0; i < 4; ++i) {
    scores(i, 0) = class0[i];
    scores(i, 1) = 1.0 - class0[i];
  }
  auto m = evaluate(pred, truth, scores);

  std::ostringstream js;
  write_metrics_json(js, m);
  auto j = nlohmann::json::parse(js.str());
  CHECK(j["accuracy"].get<double>() == doctest::Approx(0.75));
  CHECK(j["micro_auc"].get<double>() == doctest::Approx(m.micro_auc));
  REQUIRE(j["classes"].size() == 2);
  CHECK(j["classes"][0]["precision"].get<double>() ==
        doctest::Approx(m.per_class[0].precision));
  CHECK(j["classes"][1]["auc"].get<double>() ==
        doctest::Approx(m.per_class[1].auc));

  std::ostringstream roc;
  write_roc_csv(roc, scores, truth);
  std::istringstream lines(roc.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "class,fpr,tpr");
  size_t micro_rows = 0, total = 0;
  bool saw_origin = false;
  while (std::getline(lines, line)) {
    ++total;
    if (line.rfind("micro,", 0) == 0) ++micro_rows;
    if (line == "0,0,0") saw_origin = true;
  }
  CHECK(micro_rows >= 2);
  CHECK(total >= 6);
  CHECK(saw_origin);
}

TEST_CASE("stratified split") {
  std::vector<uint32_t> labels;
  for (size_t i = 0; i < 40; ++i) labels.push_back(i < 20 ? 0 : (i < 32 ? 1 : 2));

  auto s = stratified_split(labels, 0.25, 7);
  CHECK(s.train.size() + s.test.size() == labels.size());

  std::vector<size_t> counts_test(3, 0), counts_train(3, 0);
  std::vector<bool> seen(labels.size(), false);
  for (size_t i : s.test) {
    CHECK(!seen[i]);
    seen[i] = true;
    counts_test[labels[i]]++;
  }
  for (size_t i : s.train) {
    CHECK(!seen[i]);
    seen[i] = true;
    counts_train[labels[i]]++;
  }
  CHECK(counts_test == std::vector<size_t>{5, 3, 2});
  for (size_t k = 0; k < 3; ++k) CHECK(counts_train[k] > 0);

  auto s2 = stratified_split(labels, 0.25, 7);
  CHECK(s2.train == s.train);
  CHECK(s2.test == s.test);
  auto s3 = stratified_split(labels, 0.25, 8);
  CHECK(s3.test != s.test);

  // tiny classes keep at least one sample on each side
  std::vector<uint32_t> tiny{0, 0, 1, 1};
  auto st = stratified_split(tiny, 0.5, 1);
  CHECK(st.train.size() == 2);
  CHECK(st.test.size() == 2);

  CHECK_THROWS_AS(stratified_split(labels, 0.0, 1), ParamError);
  CHECK_THROWS_AS(stratified_split(labels, 1.0, 1), ParamError);
}

TEST_CASE("cross-validated lambda choice") {
  util::Prng rng(13);
  const size_t per = 12;
  auto f = make_matrix(util::RealMat(2 * per, 2), {}, 2);
  f.labels.resize(2 * per);
  for (size_t i = 0; i < 2 * per; ++i) {
    uint32_t c = static_cast<uint32_t>(i % 2);
    f.labels[i] = c;
    f.x(i, 0) = (c ? 3.0 : -3.0) + 0.2 * rng.gaussian();
    f.x(i, 1) = 0.2 * rng.gaussian();
  }

  TrainOptions opts;
  opts.epochs = 300;
  std::vector<double> grid{1e-4, 10.0};
  CHECK(cv_select_lambda(f, grid, 3, 1, opts) == 1e-4);

  // a tie keeps the earlier grid entry
  std::vector<double> close{1e-4, 2e-4};
  CHECK(cv_select_lambda(f, close, 3, 1, opts) == 1e-4);

  CHECK_THROWS_AS(cv_select_lambda(f, {}, 3, 1, opts), ParamError);
  std::vector<double> one{0.1};
  CHECK_THROWS_AS(cv_select_lambda(f, one, 1, 1, opts), ParamError);
}

TEST_CASE("synthetic cohorts are deterministic and balanced") {
  CohortSpec spec;
  spec.classes = 5;
  spec.genes = 40;
  spec.patients = 83;
  spec.drivers_per_class = 4;
  spec.seed = 42;

  auto a = generate_synthetic_cohort(spec);
  auto b = generate_synthetic_cohort(spec);
  CHECK(a == b);

  spec.seed = 43;
  auto c = generate_synthetic_cohort(spec);
  CHECK(a.snv != c.snv);

  CHECK(a.labels.size() == 83);
  std::vector<size_t> counts(5, 0);
  for (const auto& [id, y] : a.labels) {
    REQUIRE(y < 5);
    counts[y]++;
  }
  size_t lo = *std::min_element(counts.begin(), counts.end());
  size_t hi = *std::max_element(counts.begin(), counts.end());
  CHECK(hi - lo <= 1);

  for (const auto& r : a.snv) {
    CHECK(r.strength >= 0.0);
    CHECK(r.strength <= 1.0);
    CHECK(a.labels.count(r.sample_id) == 1);
  }
  for (const auto& r : a.cnv) {
    CHECK(r.copy_number >= -2);
    CHECK(r.copy_number <= 2);
    CHECK(r.copy_number != 0);
  }

  // the tables survive a tsv roundtrip unchanged
  std::ostringstream os;
  save_snv_tsv(os, a.snv);
  std::istringstream is(os.str());
  CHECK(load_snv_tsv(is) == a.snv);

  CohortSpec bad = spec;
  bad.patients = 0;
  CHECK_THROWS_AS(generate_synthetic_cohort(bad), ParamError);
  bad = spec;
  bad.signal = 1.5;
  CHECK_THROWS_AS(generate_synthetic_cohort(bad), ParamError);
}

TEST_CASE("planted signal trains well, absent signal does not") {
  auto run_pipeline = [](double signal, uint32_t classes, uint32_t patients,
                         size_t keep) {
    CohortSpec spec;
    spec.classes = classes;
    spec.genes = 60;
    spec.patients = patients;
    spec.drivers_per_class = 6;
    spec.signal = signal;
    spec.seed = 17;
    auto cohort = generate_synthetic_cohort(spec);

    auto snv_genes = rank_genes_by_snv_frequency(cohort.snv, cohort.labels);
    auto cnv_genes = cnv_gene_universe(cohort.cnv);
    auto f = build_feature_matrix(cohort.snv, cohort.cnv, cohort.labels,
                                  snv_genes, cnv_genes, SnvMode::impact, 2);

    auto scores = chi2_scores(f, 2);
    auto cols = select_top_k(scores, std::min(keep, scores.size()));
    auto fs = select_columns(f, cols);

    auto split = stratified_split(fs.labels, 0.25, 3);
    auto ftr = select_rows(fs, split.train);
    auto fte = select_rows(fs, split.test);

    TrainOptions opts;
    opts.epochs = 2000;
    auto m = train_lr_l1(ftr, 1e-3, opts);
    auto pred = predict(fte, m);
    auto met = evaluate(pred, fte.labels, predict_scores(fte, m));
    return met.accuracy;
  };

  double strong = run_pipeline(1.0, 4, 240, 40);
  CHECK(strong > 0.9);

  // with the planted effect off, held-out accuracy stays near chance
  double null = run_pipeline(0.0, 11, 220, 40);
  CHECK(null < 0.30);
}
