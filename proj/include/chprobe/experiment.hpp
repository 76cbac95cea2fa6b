#pragma once

// Desk-scale replay of the field trial: default scenario, probe sweeps over
// paths and seeds, margin classification and probe-setting comparison.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chprobe/error.hpp"
#include "chprobe/link_model.hpp"
#include "chprobe/probe.hpp"
#include "chprobe/random.hpp"
#include "chprobe/recommender.hpp"
#include "chprobe/transponder.hpp"

namespace chprobe {

struct ScenarioPath {
  std::string label;
  Lightpath path;
  SpectrumSlot slot;
  double nominal_length_km = 0.0;
  bool synthetic = false;
};

struct Scenario {
  std::vector<ScenarioPath> paths;
  std::vector<TransponderConfig> probes;
  std::vector<ModFormatSpec> catalog;
  double launch_psd_w_per_hz = 0.0;
  double q_noise_sigma_db = 0.2;
  std::vector<std::uint64_t> seeds;
  std::string reference_probe = "PL2";
  // Penalty of the characterized module ("A") and the extra penalty of the
  // module used for probing ("B").
  double characterized_penalty_db = 1.0;
  double probe_module_offset_db = 0.1;
  B2BSweep b2b;
  double operating_margin_db = 0.0;
  ThresholdSource threshold = ThresholdSource::Typical;
  Extrapolation extrapolation = Extrapolation::Reject;
  // Mixed into every per-run seed; set from the command line.
  std::uint64_t base_seed = 0;
};

namespace defaults {

inline constexpr double kSpanLengthKm = 80.0;
inline constexpr double kNoiseFigureDb = 4.5;
inline constexpr double kAddDropLossDb = 6.0;  // passive 4x1 splitter/combiner
inline constexpr double kLaunchDbmPer69GBd = -0.5;
inline constexpr double kNetToRawRatio = 200.0 / 276.0;  // 200G on 69 GBd DP-QPSK
inline constexpr double kMaxCatalogSymbolRateGbd = 95.0;
inline constexpr int kSeedCount = 200;

inline FiberSpan standard_span() {
  FiberSpan s;
  s.length_km = kSpanLengthKm;
  s.attenuation_db_per_km = 0.2;
  s.gamma_per_w_km = 1.3;
  s.beta2_ps2_per_km = -21.3;
  s.amp_noise_figure_db = kNoiseFigureDb;
  return s;
}

inline std::vector<TransponderConfig> probes() {
  return {{"PL1", 2.0, 34.0, 100.0}, {"PL2", 2.0, 69.0, 200.0}, {"PL3", 3.0, 69.0, 300.0}, {"PL4", 4.0, 69.0, 400.0}};
}

inline std::string format_name(double rate_gbps, double bits, double symbol_rate_gbd) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%gG-%.1fb-%gGBd", rate_gbps, bits, symbol_rate_gbd);
  return buf;
}

// 100G..400G in 0.5 bit/symbol steps between DP-QPSK and DP-16QAM.
inline std::vector<ModFormatSpec> catalog(double impl_penalty_db = 1.0) {
  std::vector<ModFormatSpec> out;
  for (double rate : {100.0, 200.0, 300.0, 400.0}) {
    for (double bits = 2.0; bits <= 4.0; bits += 0.5) {
      const double rs = std::round(rate / (2.0 * bits * kNetToRawRatio) * 10.0) / 10.0;
      if (rs > kMaxCatalogSymbolRateGbd) continue;
      TransponderConfig cfg{format_name(rate, bits, rs), bits, rs, rate};
      out.push_back(spec_from_fec_limit(cfg, impl_penalty_db));
    }
  }
  return out;
}

}  // namespace defaults

inline Lightpath homogeneous_path(std::string id, int spans, int loopback_count = 0) {
  Lightpath p;
  p.id = std::move(id);
  p.spans.assign(static_cast<std::size_t>(spans), defaults::standard_span());
  p.add_drop_loss_db = defaults::kAddDropLossDb;
  p.loopback_count = loopback_count;
  return p;
}

inline Scenario build_default_scenario() {
  Scenario sc;
  auto add = [&](double length_km, double freq_thz, bool synthetic, int loopbacks) {
    const int total = static_cast<int>(std::lround(length_km / defaults::kSpanLengthKm));
    const std::string label = std::to_string(static_cast<int>(length_km)) + "km";
    sc.paths.push_back({label, homogeneous_path(label, total / (loopbacks + 1), loopbacks),
                        SpectrumSlot{freq_thz, 100.0}, length_km, synthetic});
  };
  add(1016.0, 193.90, false, 0);
  add(1792.0, 194.00, false, 0);
  add(2943.0, 194.10, false, 0);
  add(3735.0, 194.20, true, 0);
  add(4851.0, 194.20, true, 0);
  add(5738.0, 194.20, false, 1);  // 2869 km physical path, looped back once
  sc.probes = defaults::probes();
  sc.catalog = defaults::catalog(sc.characterized_penalty_db);
  sc.launch_psd_w_per_hz = dbm_to_watt(defaults::kLaunchDbmPer69GBd) / 69e9;
  for (int s = 0; s < defaults::kSeedCount; ++s) sc.seeds.push_back(static_cast<std::uint64_t>(s));
  return sc;
}

inline const TransponderConfig& find_probe(const Scenario& sc, const std::string& name) {
  for (const auto& p : sc.probes)
    if (p.name == name) return p;
  throw ConfigError("unknown probe '" + name + "'");
}

inline void validate(const Scenario& sc) {
  if (sc.paths.empty()) throw ConfigError("scenario has no paths");
  if (sc.probes.empty()) throw ConfigError("scenario has no probes");
  if (sc.seeds.empty()) throw ConfigError("scenario has no seeds");
  if (!(sc.launch_psd_w_per_hz > 0.0)) throw DomainError("launch PSD must be positive");
  if (!(sc.q_noise_sigma_db >= 0.0)) throw DomainError("Q noise sigma must be non-negative");
  if (!(sc.operating_margin_db >= 0.0)) throw DomainError("operating margin must be non-negative");
  for (const auto& p : sc.paths) {
    validate(p.path);
    validate(p.slot);
  }
  for (const auto& p : sc.probes) validate(p);
  if (sc.catalog.empty()) throw ConfigError("empty configuration catalog");
  validate_catalog(sc.catalog);
  find_probe(sc, sc.reference_probe);
}

struct ProbeCharacterization {
  TransponderConfig probe;
  QuadraticFit fit;
  double residual_bound_db = 0.0;
};

struct CatalogTruth {
  ModFormatSpec spec;
  double launch_psd_w_per_hz = 0.0;
  double true_gsnr_db = 0.0;
  bool actual_feasible = false;
};

struct ProbeRun {
  ProbeResult result;
  double true_gsnr_db = 0.0;
  double error_db() const { return result.estimated_gsnr_db - true_gsnr_db; }
};

struct SeedMargins {
  std::uint64_t seed = 0;
  std::vector<MarginEntry> entries;
  std::optional<ModFormatSpec> chosen;
};

struct PathReport {
  std::string label;
  double nominal_length_km = 0.0;
  double total_length_km = 0.0;
  int span_count = 0;
  bool synthetic = false;
  SpectrumSlot slot;
  std::vector<ProbeRun> runs;  // probe-major, then seed order
  std::vector<CatalogTruth> truth;
  std::vector<SeedMargins> margins;
  std::optional<std::string> error;

  std::vector<const ProbeRun*> runs_of(const std::string& probe) const {
    std::vector<const ProbeRun*> out;
    for (const auto& r : runs)
      if (r.result.probe.name == probe) out.push_back(&r);
    return out;
  }
};

struct DeviationStats {
  std::string path;
  std::string probe;
  double mean_db = 0.0;
  double sigma_db = 0.0;
  std::size_t count = 0;
};

struct ClassificationCounts {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t true_negative = 0;
  std::size_t false_negative = 0;
  std::size_t unverified = 0;

  void add(Classification c) {
    switch (c) {
      case Classification::TruePositive: ++true_positive; break;
      case Classification::FalsePositive: ++false_positive; break;
      case Classification::TrueNegative: ++true_negative; break;
      case Classification::FalseNegative: ++false_negative; break;
      case Classification::Unverified: ++unverified; break;
    }
  }
};

struct ExperimentSummary {
  double reference_max_abs_error_db = 0.0;
  double reference_within_0p7_fraction = 0.0;
  ClassificationCounts counts;
  std::size_t failed_paths = 0;
};

struct ExperimentReport {
  std::string reference_probe;
  double launch_psd_w_per_hz = 0.0;
  double q_noise_sigma_db = 0.0;
  double operating_margin_db = 0.0;
  std::vector<ProbeCharacterization> characterizations;
  std::vector<PathReport> paths;
  std::vector<DeviationStats> deviations;
  ExperimentSummary summary;

  const PathReport& path(const std::string& label) const {
    for (const auto& p : paths)
      if (p.label == label) return p;
    throw ConfigError("unknown path label '" + label + "'");
  }
};

namespace detail {

inline std::vector<ProbeCharacterization> characterize_probes(const Scenario& sc) {
  std::vector<ProbeCharacterization> out;
  for (const auto& p : sc.probes) {
    const auto samples = synthesize_b2b(p, sc.characterized_penalty_db, sc.b2b);
    const auto fit = fit_b2b(samples);
    out.push_back({p, fit, osnr_residual_bound_db(fit, samples)});
  }
  return out;
}

inline std::uint64_t run_seed(const Scenario& sc, std::size_t path_index, std::size_t probe_index,
                              std::uint64_t seed) {
  return derive_seed({sc.base_seed, path_index, probe_index, seed});
}

inline ProbeOptions probe_options(const Scenario& sc) {
  ProbeOptions o;
  o.q_noise_sigma_db = sc.q_noise_sigma_db;
  o.impl_penalty_db = sc.characterized_penalty_db + sc.probe_module_offset_db;
  o.extrapolation = sc.extrapolation;
  return o;
}

inline std::vector<ProbeRun> probe_path(const Scenario& sc, const std::vector<ProbeCharacterization>& chars,
                                        std::size_t path_index) {
  const ScenarioPath& sp = sc.paths[path_index];
  const ProbeOptions opts = probe_options(sc);
  std::vector<ProbeRun> runs;
  runs.reserve(chars.size() * sc.seeds.size());
  for (std::size_t k = 0; k < chars.size(); ++k) {
    const auto& ch = chars[k];
    const LaunchSpec launch{sc.launch_psd_w_per_hz, ch.probe.symbol_rate_gbd};
    const double truth = true_gosnr_db(sp.path, launch, sp.slot);
    for (auto seed : sc.seeds) {
      ProbeRun run;
      run.result = run_probe(sp.path, ch.probe, sp.slot, launch, ch.fit, opts, run_seed(sc, path_index, k, seed));
      run.result.seed = seed;
      run.true_gsnr_db = truth;
      runs.push_back(std::move(run));
    }
  }
  return runs;
}

inline PathReport evaluate_path(const Scenario& sc, const std::vector<ProbeCharacterization>& chars,
                                std::size_t path_index) {
  const ScenarioPath& sp = sc.paths[path_index];
  PathReport rep;
  rep.label = sp.label;
  rep.nominal_length_km = sp.nominal_length_km;
  rep.total_length_km = sp.path.total_length_km();
  rep.span_count = sp.path.total_span_count();
  rep.synthetic = sp.synthetic;
  rep.slot = sp.slot;
  try {
    for (const auto& spec : sc.catalog) {
      if (spec.config.symbol_rate_gbd > sp.slot.width_ghz)
        throw ConfigError("'" + spec.config.name + "' does not fit the slot");
      const LaunchSpec launch{sc.launch_psd_w_per_hz, spec.config.symbol_rate_gbd};
      CatalogTruth t{spec, launch.psd_w_per_hz, true_gosnr_db(sp.path, launch, sp.slot), false};
      t.actual_feasible = t.true_gsnr_db >= required_gsnr_db(spec, sc.threshold);
      rep.truth.push_back(std::move(t));
    }
    rep.runs = probe_path(sc, chars, path_index);
    for (const ProbeRun* run : rep.runs_of(sc.reference_probe)) {
      SeedMargins sm;
      sm.seed = run->result.seed;
      sm.entries = compute_margins(run->result.estimated_gsnr_db, sc.catalog, sc.operating_margin_db);
      for (std::size_t i = 0; i < sm.entries.size(); ++i) sm.entries[i].set_actual(rep.truth[i].actual_feasible);
      sm.chosen = recommend(sm.entries, sc.operating_margin_db).chosen;
      rep.margins.push_back(std::move(sm));
    }
  } catch (const Error& e) {
    rep.error = e.what();
  }
  return rep;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sample_sigma(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Per probe, estimate minus the reference estimate of the same seed.
inline std::vector<DeviationStats> deviations_for(const PathReport& rep, const std::vector<TransponderConfig>& probes,
                                                  const std::string& reference) {
  std::vector<DeviationStats> out;
  const auto ref = rep.runs_of(reference);
  for (const auto& p : probes) {
    const auto runs = rep.runs_of(p.name);
    std::vector<double> d;
    for (std::size_t i = 0; i < runs.size() && i < ref.size(); ++i)
      d.push_back(runs[i]->result.estimated_gsnr_db - ref[i]->result.estimated_gsnr_db);
    out.push_back({rep.label, p.name, mean_of(d), sample_sigma(d), d.size()});
  }
  return out;
}

}  // namespace detail

inline ExperimentReport run_experiment(const Scenario& sc) {
  validate(sc);
  ExperimentReport report;
  report.reference_probe = sc.reference_probe;
  report.launch_psd_w_per_hz = sc.launch_psd_w_per_hz;
  report.q_noise_sigma_db = sc.q_noise_sigma_db;
  report.operating_margin_db = sc.operating_margin_db;
  report.characterizations = detail::characterize_probes(sc);

  // Paths are independent; results are stored by index so the reduction
  // below does not depend on completion order.
  std::vector<std::future<PathReport>> jobs;
  for (std::size_t i = 0; i < sc.paths.size(); ++i)
    jobs.push_back(std::async(std::launch::async, detail::evaluate_path, std::cref(sc),
                              std::cref(report.characterizations), i));
  for (auto& j : jobs) report.paths.push_back(j.get());

  std::size_t ref_total = 0, ref_within = 0;
  for (const auto& rep : report.paths) {
    if (rep.error) {
      ++report.summary.failed_paths;
      continue;
    }
    for (const ProbeRun* run : rep.runs_of(sc.reference_probe)) {
      const double err = std::abs(run->error_db());
      report.summary.reference_max_abs_error_db = std::max(report.summary.reference_max_abs_error_db, err);
      ++ref_total;
      if (err <= 0.7) ++ref_within;
    }
    for (const auto& sm : rep.margins)
      for (const auto& e : sm.entries) report.summary.counts.add(e.classification);
    auto dev = detail::deviations_for(rep, sc.probes, sc.reference_probe);
    report.deviations.insert(report.deviations.end(), dev.begin(), dev.end());
  }
  report.summary.reference_within_0p7_fraction =
      ref_total ? static_cast<double>(ref_within) / static_cast<double>(ref_total) : 0.0;
  return report;
}

struct DeviationRow {
  std::string probe;
  DeviationStats first;
  DeviationStats second;
};

// Estimation deviation of every probe setting against the reference probe on
// two labelled paths.
inline std::vector<DeviationRow> probe_setting_comparison(const Scenario& sc,
                                                          const std::pair<std::string, std::string>& labels) {
  validate(sc);
  auto index_of = [&](const std::string& label) {
    for (std::size_t i = 0; i < sc.paths.size(); ++i)
      if (sc.paths[i].label == label) return i;
    throw ConfigError("unknown path label '" + label + "'");
  };
  const std::size_t ia = index_of(labels.first);
  const std::size_t ib = index_of(labels.second);
  const auto chars = detail::characterize_probes(sc);
  PathReport a, b;
  a.label = labels.first;
  b.label = labels.second;
  a.runs = detail::probe_path(sc, chars, ia);
  b.runs = detail::probe_path(sc, chars, ib);
  const auto da = detail::deviations_for(a, sc.probes, sc.reference_probe);
  const auto db = detail::deviations_for(b, sc.probes, sc.reference_probe);
  std::vector<DeviationRow> rows;
  for (std::size_t k = 0; k < sc.probes.size(); ++k) rows.push_back({sc.probes[k].name, da[k], db[k]});
  return rows;
}

// Mean margin per (path, catalog entry) over seeds, for margin-vs-length plots.
struct Figure2Row {
  double path_length_km = 0.0;
  std::string path;
  std::string config;
  double margin_db = 0.0;
  bool actual_feasible = false;
};

inline std::vector<Figure2Row> figure2_rows(const ExperimentReport& report) {
  std::vector<Figure2Row> rows;
  for (const auto& rep : report.paths) {
    if (rep.error || rep.margins.empty()) continue;
    for (std::size_t i = 0; i < rep.truth.size(); ++i) {
      std::vector<double> m;
      for (const auto& sm : rep.margins) m.push_back(sm.entries[i].margin_db);
      rows.push_back({rep.nominal_length_km, rep.label, rep.truth[i].spec.config.name, detail::mean_of(m),
                      rep.truth[i].actual_feasible});
    }
  }
  return rows;
}

}  // namespace chprobe
