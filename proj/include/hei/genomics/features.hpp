// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hei/genomics/records.hpp"
#include "hei/util/matrix.hpp"

namespace hei::genomics {

// Gene-per-feature encoding: mutation rows collapse to one value per gene.
// Feature layout is the SNV-gene block followed by the CNV-gene block, each
// block sorted by gene symbol, names prefixed "snv:" / "cnv:" so a gene
// appearing in both blocks stays unambiguous. The layout is a function of
// the gene sets alone, so a served model and a client encoding the same
// sets always agree column for column.

struct FeatureMatrix {
  util::RealMat x;  // samples x features
  std::vector<std::string> names;
  std::vector<std::string> sample_ids;  // row order
  std::vector<uint32_t> labels;         // per row, 0..classes-1
  uint32_t classes = 0;

  size_t samples() const { return x.rows; }
  size_t features() const { return x.cols; }
};

enum class SnvMode { presence, impact };

// Per cancer type, count SNV rows per gene (every row counts, so recurrent
// genes rank high), keep the top_k per class (count desc, symbol asc on
// ties), and return the union sorted by symbol. ParamError on no records
// or on a record whose sample has no label.
std::vector<std::string> rank_genes_by_snv_frequency(
    std::span<const SnvRecord> records, const LabelMap& labels,
    size_t top_k = 10000);

// All distinct genes in the CNV table, sorted.
std::vector<std::string> cnv_gene_universe(std::span<const CnvRecord> records);

// One sample's block values against a sorted gene list. Records for genes
// outside the list are ignored. presence: 1 if the gene has any SNV;
// impact: sum over the gene's SNVs of sift * strength * impact.
std::vector<double> encode_snv(std::span<const SnvRecord> sample_records,
                               std::span<const std::string> genes,
                               SnvMode mode);
// copy_number + 2; a gene with no CNV row sits at 2 (no alteration).
std::vector<double> encode_cnv(std::span<const CnvRecord> sample_records,
                               std::span<const std::string> genes);

FeatureMatrix build_feature_matrix(std::span<const SnvRecord> snv,
                                   std::span<const CnvRecord> cnv,
                                   const LabelMap& labels,
                                   std::span<const std::string> snv_genes,
                                   std::span<const std::string> cnv_genes,
                                   SnvMode mode, unsigned threads = 0);

// Independence score of each feature against the class label. Per feature:
// O_k = sum of the feature over class-k samples, E_k = class sample share
// times the feature's total, score = sum_k (O_k - E_k)^2 / E_k. A feature
// summing to zero scores 0. ParamError on negative entries.
std::vector<double> chi2_scores(const FeatureMatrix& f, unsigned threads = 0);

// Indices of the k largest scores (ties to the lower index), returned
// sorted ascending so downstream layout stays stable. ParamError if k
// exceeds the number of scores.
std::vector<size_t> select_top_k(std::span<const double> scores, size_t k);

FeatureMatrix select_columns(const FeatureMatrix& f,
                             std::span<const size_t> keep);
FeatureMatrix select_rows(const FeatureMatrix& f,
                          std::span<const size_t> keep);

// Binary container (magic "FMTX") holding the matrix, names, sample ids,
// and labels; CSV export for inspection.
void save_feature_matrix(std::ostream& os, const FeatureMatrix& f);
FeatureMatrix load_feature_matrix(std::istream& is);
void save_feature_matrix_file(const std::string& path, const FeatureMatrix& f);
FeatureMatrix load_feature_matrix_file(const std::string& path);
void write_feature_csv(std::ostream& os, const FeatureMatrix& f);

}  // namespace hei::genomics
