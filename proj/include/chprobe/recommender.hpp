#pragma once

// Margin computation against a format catalog, configuration selection and
// classification of predictions against ground truth.

#include <algorithm>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "chprobe/error.hpp"
#include "chprobe/link_model.hpp"
#include "chprobe/transponder.hpp"

namespace chprobe {

enum class Classification { Unverified, TruePositive, FalsePositive, TrueNegative, FalseNegative };

inline std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::TruePositive: return "true-positive";
    case Classification::FalsePositive: return "false-positive";
    case Classification::TrueNegative: return "true-negative";
    case Classification::FalseNegative: return "false-negative";
    case Classification::Unverified: break;
  }
  return "unverified";
}

inline Classification classify(bool predicted, std::optional<bool> actual) {
  if (!actual) return Classification::Unverified;
  if (predicted) return *actual ? Classification::TruePositive : Classification::FalsePositive;
  return *actual ? Classification::FalseNegative : Classification::TrueNegative;
}

struct MarginEntry {
  ModFormatSpec spec;
  double estimated_gsnr_db = 0.0;
  double margin_db = 0.0;
  bool predicted_feasible = false;
  std::optional<bool> actual_feasible;
  Classification classification = Classification::Unverified;

  void set_actual(bool actual) {
    actual_feasible = actual;
    classification = classify(predicted_feasible, actual_feasible);
  }
};

struct Recommendation {
  std::optional<ModFormatSpec> chosen;
  double operating_margin_db = 0.0;
  std::vector<MarginEntry> ranking;
};

// margin = estimated GSNR - typical required GSNR; feasible iff margin >= operating margin.
inline std::vector<MarginEntry> compute_margins(double estimated_gsnr_db, const std::vector<ModFormatSpec>& catalog,
                                                double operating_margin_db) {
  if (catalog.empty()) throw ConfigError("empty configuration catalog");
  if (!(operating_margin_db >= 0.0)) throw DomainError("operating margin must be non-negative");
  std::vector<MarginEntry> out;
  out.reserve(catalog.size());
  for (const auto& spec : catalog) {
    MarginEntry e;
    e.spec = spec;
    e.estimated_gsnr_db = estimated_gsnr_db;
    e.margin_db = estimated_gsnr_db - spec.required_gsnr_typical_db;
    e.predicted_feasible = e.margin_db >= operating_margin_db;
    out.push_back(std::move(e));
  }
  return out;
}

// Selection key: line rate, then spectral efficiency, then the narrower signal.
inline bool preferred_over(const TransponderConfig& x, const TransponderConfig& y) {
  if (x.line_rate_gbps != y.line_rate_gbps) return x.line_rate_gbps > y.line_rate_gbps;
  if (x.bits_per_symbol != y.bits_per_symbol) return x.bits_per_symbol > y.bits_per_symbol;
  return x.symbol_rate_gbd < y.symbol_rate_gbd;
}

// Ranking: predicted-feasible entries first, each group ordered by the selection key.
inline Recommendation recommend(std::vector<MarginEntry> entries, double operating_margin_db) {
  std::stable_sort(entries.begin(), entries.end(), [](const MarginEntry& x, const MarginEntry& y) {
    if (x.predicted_feasible != y.predicted_feasible) return x.predicted_feasible;
    return preferred_over(x.spec.config, y.spec.config);
  });
  Recommendation rec;
  rec.operating_margin_db = operating_margin_db;
  if (!entries.empty() && entries.front().predicted_feasible) rec.chosen = entries.front().spec;
  rec.ranking = std::move(entries);
  return rec;
}

enum class ThresholdSource { Typical, WorstCase };

inline double required_gsnr_db(const ModFormatSpec& spec, ThresholdSource source) {
  return source == ThresholdSource::Typical ? spec.required_gsnr_typical_db : spec.required_gsnr_worst_db;
}

// Ground truth: does the format work on the path when launched at `psd_w_per_hz`?
inline bool verify(const Lightpath& path, const ModFormatSpec& spec, const SpectrumSlot& slot, double psd_w_per_hz,
                   ThresholdSource source = ThresholdSource::Typical,
                   std::optional<double> txrx_snr_db = std::nullopt) {
  const LaunchSpec launch{psd_w_per_hz, spec.config.symbol_rate_gbd};
  return true_gosnr_db(path, launch, slot, txrx_snr_db) >= required_gsnr_db(spec, source);
}

// Verification against a launch that must share the probe's PSD.
inline bool verify(const Lightpath& path, const ModFormatSpec& spec, const SpectrumSlot& slot,
                   const LaunchSpec& probe_launch, ThresholdSource source = ThresholdSource::Typical) {
  return verify(path, spec, slot, probe_launch.psd_w_per_hz, source);
}

// Walks the ranking until a predicted-feasible entry passes `accept`; entries
// that fail are reported in `rejected` when provided.
inline std::optional<ModFormatSpec> fine_tune(const Recommendation& rec,
                                              const std::function<bool(const ModFormatSpec&)>& accept,
                                              std::vector<ModFormatSpec>* rejected = nullptr) {
  for (const auto& e : rec.ranking) {
    if (!e.predicted_feasible) break;
    if (accept(e.spec)) return e.spec;
    if (rejected) rejected->push_back(e.spec);
  }
  return std::nullopt;
}

}  // namespace chprobe
