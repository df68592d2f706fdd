// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/genomics/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

#include "hei/util/errors.hpp"
#include "hei/util/rng.hpp"

namespace hei::genomics {

namespace {

std::string padded_id(char prefix, uint32_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%04u", prefix, n);
  return buf;
}

constexpr double kDriverSnvBoost = 0.55;
constexpr double kDriverCnvBoost = 0.45;

}  // namespace

SyntheticCohort generate_synthetic_cohort(const CohortSpec& spec) {
  if (spec.classes == 0 || spec.genes == 0 || spec.patients == 0)
    throw ParamError("cohort: classes, genes and patients must be positive");
  if (!(spec.signal >= 0.0 && spec.signal <= 1.0))
    throw ParamError("cohort: signal must be in [0,1]");
  if (!(spec.background_snv_rate >= 0.0 && spec.background_snv_rate < 1.0) ||
      !(spec.background_cnv_rate >= 0.0 && spec.background_cnv_rate < 1.0))
    throw ParamError("cohort: background rates must be in [0,1)");

  util::Prng rng(spec.seed);
  SyntheticCohort out;

  std::vector<std::string> gene_names(spec.genes);
  for (uint32_t g = 0; g < spec.genes; ++g) gene_names[g] = padded_id('G', g);

  // driver_slot[g] for class k: which driver index g occupies, or -1.
  std::vector<int> driver_slot(spec.genes);

  for (uint32_t i = 0; i < spec.patients; ++i) {
    const uint32_t k = i % spec.classes;
    std::string pid = padded_id('P', i);
    out.labels.emplace(pid, k);

    std::fill(driver_slot.begin(), driver_slot.end(), -1);
    for (uint32_t j = 0; j < spec.drivers_per_class; ++j)
      driver_slot[(k * spec.drivers_per_class + j) % spec.genes] =
          static_cast<int>(j);

    for (uint32_t g = 0; g < spec.genes; ++g) {
      const bool driver = driver_slot[g] >= 0;

      double p_snv = spec.background_snv_rate +
                     (driver ? kDriverSnvBoost * spec.signal : 0.0);
      p_snv = std::min(p_snv, 0.95);
      if (rng.uniform_double() < p_snv) {
        SnvRecord r;
        r.sample_id = pid;
        r.gene = gene_names[g];
        if (driver && rng.uniform_double() < spec.signal) {
          r.sift = SiftClass::deleterious;
          r.impact = ImpactClass::high;
          r.strength = 0.75 + 0.25 * rng.uniform_double();
        } else {
          r.sift = static_cast<SiftClass>(rng.uniform_u64(4));
          r.impact = static_cast<ImpactClass>(rng.uniform_u64(4));
          r.strength = rng.uniform_double();
        }
        out.snv.push_back(std::move(r));
      }

      double p_cnv = spec.background_cnv_rate +
                     (driver ? kDriverCnvBoost * spec.signal : 0.0);
      p_cnv = std::min(p_cnv, 0.95);
      if (rng.uniform_double() < p_cnv) {
        CnvRecord r;
        r.sample_id = pid;
        r.gene = gene_names[g];
        if (driver && rng.uniform_double() < spec.signal) {
          // class-and-slot keyed direction so each class gets a fixed
          // amplification/deletion pattern over its drivers
          r.copy_number = ((k + static_cast<uint32_t>(driver_slot[g])) % 2)
                              ? -2
                              : 2;
        } else {
          static constexpr int kShifts[4] = {-2, -1, 1, 2};
          r.copy_number = kShifts[rng.uniform_u64(4)];
        }
        out.cnv.push_back(std::move(r));
      }
    }
  }
  return out;
}

}  // namespace hei::genomics
