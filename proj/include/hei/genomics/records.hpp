// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hei::genomics {

// Raw mutation rows as they come out of the TSV files. One SNV row is one
// observed point mutation; a gene can collect several per patient.

enum class SiftClass : uint8_t {
  deleterious = 0,
  deleterious_lc = 1,  // low confidence
  tolerated_lc = 2,
  tolerated = 3,
};

enum class ImpactClass : uint8_t {
  high = 0,
  moderate = 1,
  modifier = 2,
  low = 3,
};

struct SnvRecord {
  std::string sample_id;
  std::string gene;
  SiftClass sift = SiftClass::tolerated;
  double strength = 0.0;  // clamped to [0,1] at ingestion
  ImpactClass impact = ImpactClass::low;

  bool operator==(const SnvRecord&) const = default;
};

struct CnvRecord {
  std::string sample_id;
  std::string gene;
  int copy_number = 0;  // -2..2

  bool operator==(const CnvRecord&) const = default;
};

// Per-category feature weights. The qualitative call dominates, its
// confidence discounts it; the impact class is deliberately not monotone
// in its enum order (moderate sits below modifier).
double sift_value(SiftClass c);      // 1.0, 0.75, 0.5, 0.25
double impact_value(ImpactClass c);  // 1.0, 0.4, 0.7, 0.1

std::string_view to_string(SiftClass c);
std::string_view to_string(ImpactClass c);
SiftClass sift_from_string(std::string_view s);      // CodecError if unknown
ImpactClass impact_from_string(std::string_view s);  // CodecError if unknown

// sample id -> class id. Ordered map so every sample iteration in the
// pipeline is deterministic.
using LabelMap = std::map<std::string, uint32_t>;

// TSV with a header line; columns are documented in the loaders. Malformed
// rows, unknown enum spellings, and out-of-range values raise CodecError
// with the line number.
std::vector<SnvRecord> load_snv_tsv(std::istream& is);
std::vector<CnvRecord> load_cnv_tsv(std::istream& is);
LabelMap load_labels_tsv(std::istream& is);

void save_snv_tsv(std::ostream& os, std::span<const SnvRecord> records);
void save_cnv_tsv(std::ostream& os, std::span<const CnvRecord> records);
void save_labels_tsv(std::ostream& os, const LabelMap& labels);

}  // namespace hei::genomics
