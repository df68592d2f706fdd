// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "hei/genomics/records.hpp"

namespace hei::genomics {

// Synthetic cohort with planted per-class driver genes. Each class owns a
// slice of the gene list; its patients mutate those genes more often and
// with more severe calls, and carry a class-specific copy-number shift on
// them. signal scales the planted effect: 0 leaves drivers identical to
// background (labels carry no information), 1 is the full effect.
struct CohortSpec {
  uint32_t classes = 11;
  uint32_t genes = 220;
  uint32_t patients = 2000;
  uint32_t drivers_per_class = 8;
  double signal = 1.0;
  double background_snv_rate = 0.02;   // per (patient, gene)
  double background_cnv_rate = 0.05;   // chance of any alteration row
  uint64_t seed = 1;
};

struct SyntheticCohort {
  std::vector<SnvRecord> snv;
  std::vector<CnvRecord> cnv;
  LabelMap labels;

  bool operator==(const SyntheticCohort&) const = default;
};

// Deterministic in spec.seed: same spec, byte-identical records on any
// platform. Classes are balanced round-robin over patients.
SyntheticCohort generate_synthetic_cohort(const CohortSpec& spec);

}  // namespace hei::genomics
