// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/genomics/records.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>

#include "hei/util/errors.hpp"

namespace hei::genomics {

double sift_value(SiftClass c) {
  switch (c) {
    case SiftClass::deleterious: return 1.0;
    case SiftClass::deleterious_lc: return 0.75;
    case SiftClass::tolerated_lc: return 0.5;
    case SiftClass::tolerated: return 0.25;
  }
  throw CodecError("invalid sift class value");
}

double impact_value(ImpactClass c) {
  switch (c) {
    case ImpactClass::high: return 1.0;
    case ImpactClass::moderate: return 0.4;
    case ImpactClass::modifier: return 0.7;
    case ImpactClass::low: return 0.1;
  }
  throw CodecError("invalid impact class value");
}

std::string_view to_string(SiftClass c) {
  switch (c) {
    case SiftClass::deleterious: return "deleterious";
    case SiftClass::deleterious_lc: return "deleterious_lc";
    case SiftClass::tolerated_lc: return "tolerated_lc";
    case SiftClass::tolerated: return "tolerated";
  }
  throw CodecError("invalid sift class value");
}

std::string_view to_string(ImpactClass c) {
  switch (c) {
    case ImpactClass::high: return "high";
    case ImpactClass::moderate: return "moderate";
    case ImpactClass::modifier: return "modifier";
    case ImpactClass::low: return "low";
  }
  throw CodecError("invalid impact class value");
}

SiftClass sift_from_string(std::string_view s) {
  if (s == "deleterious") return SiftClass::deleterious;
  if (s == "deleterious_lc") return SiftClass::deleterious_lc;
  if (s == "tolerated_lc") return SiftClass::tolerated_lc;
  if (s == "tolerated") return SiftClass::tolerated;
  throw CodecError("unknown sift class '" + std::string(s) + "'");
}

ImpactClass impact_from_string(std::string_view s) {
  if (s == "high") return ImpactClass::high;
  if (s == "moderate") return ImpactClass::moderate;
  if (s == "modifier") return ImpactClass::modifier;
  if (s == "low") return ImpactClass::low;
  throw CodecError("unknown impact class '" + std::string(s) + "'");
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

[[noreturn]] void bad_row(const char* what, size_t line_no,
                          const std::string& detail) {
  throw CodecError(std::string(what) + " line " + std::to_string(line_no) +
                   ": " + detail);
}

// Reads the header, checks it verbatim, then hands each data line to fn.
template <typename Fn>
void for_each_row(std::istream& is, const char* what, const char* header,
                  size_t cols, Fn fn) {
  std::string line;
  if (!std::getline(is, line)) bad_row(what, 1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header)
    bad_row(what, 1, "expected header '" + std::string(header) + "'");
  size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != cols)
      bad_row(what, line_no,
              "expected " + std::to_string(cols) + " columns, got " +
                  std::to_string(fields.size()));
    fn(fields, line_no);
  }
}

double parse_double(std::string_view s, const char* what, size_t line_no) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    bad_row(what, line_no, "bad number '" + std::string(s) + "'");
  return v;
}

long parse_int(std::string_view s, const char* what, size_t line_no) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    bad_row(what, line_no, "bad integer '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::vector<SnvRecord> load_snv_tsv(std::istream& is) {
  std::vector<SnvRecord> out;
  for_each_row(
      is, "snv tsv", "sample_id\tgene\tsift_class\tstrength\timpact_class", 5,
      [&](const std::vector<std::string_view>& f, size_t line_no) {
        SnvRecord r;
        r.sample_id = std::string(f[0]);
        r.gene = std::string(f[1]);
        if (r.sample_id.empty() || r.gene.empty())
          bad_row("snv tsv", line_no, "empty sample or gene");
        r.sift = sift_from_string(f[2]);
        double s = parse_double(f[3], "snv tsv", line_no);
        if (!std::isfinite(s))
          bad_row("snv tsv", line_no, "strength not finite");
        r.strength = std::clamp(s, 0.0, 1.0);
        r.impact = impact_from_string(f[4]);
        out.push_back(std::move(r));
      });
  return out;
}

std::vector<CnvRecord> load_cnv_tsv(std::istream& is) {
  std::vector<CnvRecord> out;
  for_each_row(is, "cnv tsv", "sample_id\tgene\tcopy_number", 3,
               [&](const std::vector<std::string_view>& f, size_t line_no) {
                 CnvRecord r;
                 r.sample_id = std::string(f[0]);
                 r.gene = std::string(f[1]);
                 if (r.sample_id.empty() || r.gene.empty())
                   bad_row("cnv tsv", line_no, "empty sample or gene");
                 long cn = parse_int(f[2], "cnv tsv", line_no);
                 if (cn < -2 || cn > 2)
                   bad_row("cnv tsv", line_no,
                           "copy number " + std::to_string(cn) +
                               " outside -2..2");
                 r.copy_number = static_cast<int>(cn);
                 out.push_back(std::move(r));
               });
  return out;
}

LabelMap load_labels_tsv(std::istream& is) {
  LabelMap out;
  for_each_row(is, "labels tsv", "sample_id\tlabel", 2,
               [&](const std::vector<std::string_view>& f, size_t line_no) {
                 std::string id(f[0]);
                 if (id.empty()) bad_row("labels tsv", line_no, "empty sample");
                 long v = parse_int(f[1], "labels tsv", line_no);
                 if (v < 0 || v > 0xffff)
                   bad_row("labels tsv", line_no, "label out of range");
                 auto [it, fresh] =
                     out.emplace(std::move(id), static_cast<uint32_t>(v));
                 if (!fresh)
                   bad_row("labels tsv", line_no,
                           "duplicate sample '" + it->first + "'");
               });
  return out;
}

void save_snv_tsv(std::ostream& os, std::span<const SnvRecord> records) {
  os << "sample_id\tgene\tsift_class\tstrength\timpact_class\n";
  char buf[32];
  for (const auto& r : records) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), r.strength);
    os << r.sample_id << '\t' << r.gene << '\t' << to_string(r.sift) << '\t'
       << std::string_view(buf, p - buf) << '\t' << to_string(r.impact)
       << '\n';
  }
  if (!os) throw CodecError("snv tsv write failed");
}

void save_cnv_tsv(std::ostream& os, std::span<const CnvRecord> records) {
  os << "sample_id\tgene\tcopy_number\n";
  for (const auto& r : records)
    os << r.sample_id << '\t' << r.gene << '\t' << r.copy_number << '\n';
  if (!os) throw CodecError("cnv tsv write failed");
}

void save_labels_tsv(std::ostream& os, const LabelMap& labels) {
  os << "sample_id\tlabel\n";
  for (const auto& [id, v] : labels) os << id << '\t' << v << '\n';
  if (!os) throw CodecError("labels tsv write failed");
}

}  // namespace hei::genomics
