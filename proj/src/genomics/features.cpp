// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/genomics/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include "hei/util/errors.hpp"
#include "hei/util/io.hpp"
#include "hei/util/parallel.hpp"

namespace hei::genomics {

namespace {

uint32_t class_of(const LabelMap& labels, const std::string& sample,
                  const char* what) {
  auto it = labels.find(sample);
  if (it == labels.end())
    throw ParamError(std::string(what) + ": sample '" + sample +
                     "' has no label");
  return it->second;
}

// index of gene in a sorted list, or npos
size_t gene_index(std::span<const std::string> genes, const std::string& g) {
  auto it = std::lower_bound(genes.begin(), genes.end(), g);
  if (it == genes.end() || *it != g) return static_cast<size_t>(-1);
  return static_cast<size_t>(it - genes.begin());
}

}  // namespace

std::vector<std::string> rank_genes_by_snv_frequency(
    std::span<const SnvRecord> records, const LabelMap& labels,
    size_t top_k) {
  if (records.empty())
    throw ParamError("gene ranking: no SNV records");
  if (top_k == 0) throw ParamError("gene ranking: top_k must be positive");

  // class -> gene -> row count
  std::map<uint32_t, std::unordered_map<std::string, size_t>> counts;
  for (const auto& r : records)
    ++counts[class_of(labels, r.sample_id, "gene ranking")][r.gene];

  std::set<std::string> keep;
  std::vector<std::pair<const std::string*, size_t>> ranked;
  for (auto& [cls, per_gene] : counts) {
    ranked.clear();
    ranked.reserve(per_gene.size());
    for (auto& [gene, n] : per_gene) ranked.emplace_back(&gene, n);
    size_t take = std::min(top_k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + take, ranked.end(),
                      [](const auto& a, const auto& b) {
                        if (a.second != b.second) return a.second > b.second;
                        return *a.first < *b.first;
                      });
    for (size_t i = 0; i < take; ++i) keep.insert(*ranked[i].first);
  }
  return {keep.begin(), keep.end()};
}

std::vector<std::string> cnv_gene_universe(
    std::span<const CnvRecord> records) {
  std::set<std::string> genes;
  for (const auto& r : records) genes.insert(r.gene);
  return {genes.begin(), genes.end()};
}

std::vector<double> encode_snv(std::span<const SnvRecord> sample_records,
                               std::span<const std::string> genes,
                               SnvMode mode) {
  std::vector<double> v(genes.size(), 0.0);
  for (const auto& r : sample_records) {
    size_t g = gene_index(genes, r.gene);
    if (g == static_cast<size_t>(-1)) continue;
    if (mode == SnvMode::presence)
      v[g] = 1.0;
    else
      v[g] += sift_value(r.sift) * r.strength * impact_value(r.impact);
  }
  return v;
}

std::vector<double> encode_cnv(std::span<const CnvRecord> sample_records,
                               std::span<const std::string> genes) {
  std::vector<double> v(genes.size(), 2.0);  // no record = no alteration
  for (const auto& r : sample_records) {
    if (r.copy_number < -2 || r.copy_number > 2)
      throw ParamError("cnv encode: copy number outside -2..2");
    size_t g = gene_index(genes, r.gene);
    if (g == static_cast<size_t>(-1)) continue;
    v[g] = static_cast<double>(r.copy_number + 2);
  }
  return v;
}

FeatureMatrix build_feature_matrix(std::span<const SnvRecord> snv,
                                   std::span<const CnvRecord> cnv,
                                   const LabelMap& labels,
                                   std::span<const std::string> snv_genes,
                                   std::span<const std::string> cnv_genes,
                                   SnvMode mode, unsigned threads) {
  if (labels.empty()) throw ParamError("feature matrix: no labeled samples");
  if (!std::is_sorted(snv_genes.begin(), snv_genes.end()) ||
      !std::is_sorted(cnv_genes.begin(), cnv_genes.end()))
    throw ParamError("feature matrix: gene lists must be sorted");

  FeatureMatrix f;
  for (const auto& [id, cls] : labels) {
    f.sample_ids.push_back(id);
    f.labels.push_back(cls);
    f.classes = std::max(f.classes, cls + 1);
  }
  f.names.reserve(snv_genes.size() + cnv_genes.size());
  for (const auto& g : snv_genes) f.names.push_back("snv:" + g);
  for (const auto& g : cnv_genes) f.names.push_back("cnv:" + g);

  // bucket records by row; rows are the sorted label order
  std::unordered_map<std::string, size_t> row_of;
  row_of.reserve(f.sample_ids.size());
  for (size_t i = 0; i < f.sample_ids.size(); ++i) row_of[f.sample_ids[i]] = i;
  std::vector<std::vector<SnvRecord>> snv_rows(f.sample_ids.size());
  for (const auto& r : snv) {
    auto it = row_of.find(r.sample_id);
    if (it == row_of.end())
      throw ParamError("feature matrix: sample '" + r.sample_id +
                       "' has no label");
    snv_rows[it->second].push_back(r);
  }
  std::vector<std::vector<CnvRecord>> cnv_rows(f.sample_ids.size());
  for (const auto& r : cnv) {
    auto it = row_of.find(r.sample_id);
    if (it == row_of.end())
      throw ParamError("feature matrix: sample '" + r.sample_id +
                       "' has no label");
    cnv_rows[it->second].push_back(r);
  }

  f.x = util::RealMat(f.sample_ids.size(),
                      snv_genes.size() + cnv_genes.size());
  util::parallel_for(
      f.sample_ids.size(),
      [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i) {
          auto sv = encode_snv(snv_rows[i], snv_genes, mode);
          auto cv = encode_cnv(cnv_rows[i], cnv_genes);
          double* row = &f.x(i, 0);
          std::copy(sv.begin(), sv.end(), row);
          std::copy(cv.begin(), cv.end(), row + sv.size());
        }
      },
      threads);
  return f;
}

std::vector<double> chi2_scores(const FeatureMatrix& f, unsigned threads) {
  if (f.samples() == 0 || f.features() == 0)
    throw ParamError("chi2: empty feature matrix");
  if (f.labels.size() != f.samples())
    throw ParamError("chi2: label count does not match rows");

  std::vector<size_t> class_count(f.classes, 0);
  for (uint32_t y : f.labels) ++class_count[y];
  std::vector<double> share(f.classes);
  for (uint32_t k = 0; k < f.classes; ++k)
    share[k] = static_cast<double>(class_count[k]) /
               static_cast<double>(f.samples());

  std::vector<double> scores(f.features(), 0.0);
  util::parallel_for(
      f.features(),
      [&](size_t lo, size_t hi) {
        std::vector<double> observed(f.classes);
        for (size_t j = lo; j < hi; ++j) {
          std::fill(observed.begin(), observed.end(), 0.0);
          double total = 0.0;
          for (size_t i = 0; i < f.samples(); ++i) {
            double v = f.x(i, j);
            if (v < 0.0)
              throw ParamError("chi2: negative feature value at row " +
                               std::to_string(i) + " column " +
                               std::to_string(j));
            observed[f.labels[i]] += v;
            total += v;
          }
          if (total == 0.0) continue;  // scores 0 by convention
          double score = 0.0;
          for (uint32_t k = 0; k < f.classes; ++k) {
            if (class_count[k] == 0) continue;
            double expected = share[k] * total;
            double d = observed[k] - expected;
            score += d * d / expected;
          }
          scores[j] = score;
        }
      },
      threads);
  return scores;
}

std::vector<size_t> select_top_k(std::span<const double> scores, size_t k) {
  if (k > scores.size())
    throw ParamError("select_top_k: k=" + std::to_string(k) + " exceeds " +
                     std::to_string(scores.size()) + " features");
  std::vector<size_t> idx(scores.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                    [&](size_t a, size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

FeatureMatrix select_columns(const FeatureMatrix& f,
                             std::span<const size_t> keep) {
  FeatureMatrix out;
  out.sample_ids = f.sample_ids;
  out.labels = f.labels;
  out.classes = f.classes;
  out.names.reserve(keep.size());
  for (size_t j : keep) {
    if (j >= f.features()) throw ParamError("select_columns: index out of range");
    out.names.push_back(f.names[j]);
  }
  out.x = util::RealMat(f.samples(), keep.size());
  for (size_t i = 0; i < f.samples(); ++i)
    for (size_t jj = 0; jj < keep.size(); ++jj)
      out.x(i, jj) = f.x(i, keep[jj]);
  return out;
}

FeatureMatrix select_rows(const FeatureMatrix& f,
                          std::span<const size_t> keep) {
  FeatureMatrix out;
  out.names = f.names;
  out.classes = f.classes;
  out.x = util::RealMat(keep.size(), f.features());
  for (size_t ii = 0; ii < keep.size(); ++ii) {
    size_t i = keep[ii];
    if (i >= f.samples()) throw ParamError("select_rows: index out of range");
    out.sample_ids.push_back(f.sample_ids[i]);
    out.labels.push_back(f.labels[i]);
    std::copy(&f.x(i, 0), &f.x(i, 0) + f.features(), &out.x(ii, 0));
  }
  return out;
}

namespace {
constexpr char kFmtxMagic[4] = {'F', 'M', 'T', 'X'};
constexpr uint16_t kFmtxVersion = 1;
}  // namespace

void save_feature_matrix(std::ostream& os, const FeatureMatrix& f) {
  if (f.names.size() != f.features())
    throw ParamError("feature matrix save: name count mismatch");
  if (f.labels.size() != f.samples() || f.sample_ids.size() != f.samples())
    throw ParamError("feature matrix save: row metadata mismatch");
  util::write_bytes(os, kFmtxMagic, 4);
  util::write_le<uint16_t>(os, kFmtxVersion);
  util::write_le<uint64_t>(os, f.samples());
  util::write_le<uint64_t>(os, f.features());
  util::write_le<uint32_t>(os, f.classes);
  for (const auto& n : f.names) util::write_string(os, n);
  for (const auto& s : f.sample_ids) util::write_string(os, s);
  for (uint32_t y : f.labels) util::write_le<uint32_t>(os, y);
  for (double v : f.x.a) util::write_le<double>(os, v);
}

FeatureMatrix load_feature_matrix(std::istream& is) {
  char magic[4];
  util::read_bytes(is, magic, 4);
  if (std::string_view(magic, 4) != std::string_view(kFmtxMagic, 4))
    throw CodecError("feature matrix: bad magic");
  uint16_t ver = util::read_le<uint16_t>(is);
  if (ver != kFmtxVersion)
    throw CodecError("feature matrix: unsupported version " +
                     std::to_string(ver));
  uint64_t rows = util::read_le<uint64_t>(is);
  uint64_t cols = util::read_le<uint64_t>(is);
  if (rows == 0 || cols == 0 || rows > (uint64_t{1} << 32) ||
      cols > (uint64_t{1} << 32) || rows * cols > (uint64_t{1} << 34))
    throw CodecError("feature matrix: implausible dimensions");
  FeatureMatrix f;
  f.classes = util::read_le<uint32_t>(is);
  f.names.reserve(cols);
  for (uint64_t j = 0; j < cols; ++j) f.names.push_back(util::read_string(is));
  f.sample_ids.reserve(rows);
  for (uint64_t i = 0; i < rows; ++i)
    f.sample_ids.push_back(util::read_string(is));
  f.labels.reserve(rows);
  for (uint64_t i = 0; i < rows; ++i) {
    uint32_t y = util::read_le<uint32_t>(is);
    if (y >= f.classes) throw CodecError("feature matrix: label out of range");
    f.labels.push_back(y);
  }
  f.x = util::RealMat(rows, cols);
  for (double& v : f.x.a) v = util::read_le<double>(is);
  return f;
}

void save_feature_matrix_file(const std::string& path,
                              const FeatureMatrix& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CodecError("cannot open " + path + " for writing");
  save_feature_matrix(os, f);
}

FeatureMatrix load_feature_matrix_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CodecError("cannot open " + path);
  return load_feature_matrix(is);
}

void write_feature_csv(std::ostream& os, const FeatureMatrix& f) {
  os << "sample_id,label";
  for (const auto& n : f.names) os << ',' << n;
  os << '\n';
  char buf[32];
  for (size_t i = 0; i < f.samples(); ++i) {
    os << f.sample_ids[i] << ',' << f.labels[i];
    for (size_t j = 0; j < f.features(); ++j) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), f.x(i, j));
      os << ',' << std::string_view(buf, p - buf);
    }
    os << '\n';
  }
  if (!os) throw CodecError("feature csv write failed");
}

}  // namespace hei::genomics
