// chprobe: characterize a probing transponder, probe a lightpath, recommend a
// transponder configuration and replay the verification experiment.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "chprobe/experiment.hpp"
#include "chprobe/io.hpp"
#include "chprobe/probe.hpp"
#include "chprobe/recommender.hpp"
#include "chprobe/transponder.hpp"

namespace fs = std::filesystem;
using namespace chprobe;
using io::json;

namespace {

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty()) std::cout << content;
  else io::write_file(out_path, content);
}

Extrapolation parse_extrapolation(const std::string& s) {
  return s == "clamp" ? Extrapolation::Clamp : Extrapolation::Reject;
}

struct CharacterizeArgs {
  std::string b2b_csv;
  std::string synthetic_probe;
  std::string fit_out;
  std::string samples_out;
  double impl_penalty_db = 1.0;
  double q_noise_sigma_db = 0.0;
  std::size_t min_samples = 4;
  B2BSweep sweep;
};

int cmd_characterize(const CharacterizeArgs& a, std::uint64_t seed) {
  std::vector<QOverOsnrSample> samples;
  if (!a.b2b_csv.empty()) {
    samples = io::samples_from_csv(io::read_file(a.b2b_csv));
  } else {
    const Scenario sc = build_default_scenario();
    samples = synthesize_b2b(find_probe(sc, a.synthetic_probe), a.impl_penalty_db, a.sweep, a.q_noise_sigma_db, seed);
  }
  FitOptions opts;
  opts.min_samples = a.min_samples;
  const QuadraticFit fit = fit_b2b(samples, opts);
  if (!a.samples_out.empty()) io::write_file(a.samples_out, io::samples_to_csv(samples));
  io::write_file(a.fit_out, io::dump(io::to_json(fit)));
  std::printf("samples: %zu\n", samples.size());
  std::printf("fit: q_db = %.9g*x^2 + %.9g*x + %.9g\n", fit.a, fit.b, fit.c);
  std::printf("residual RMS: %.3e dB\n", fit.residual_rms_db);
  std::printf("monotonic range: [%g, %g] dB OSNR -> [%.6g, %.6g] dB Q\n", fit.osnr_min_db, fit.osnr_max_db,
              fit.q_min_db(), fit.q_max_db());
  return 0;
}

struct ProbeArgs {
  std::string topology;
  std::string fit;
  std::string probe;
  std::string probes_file;
  std::string lightpath;
  std::string slot;
  std::optional<double> psd_w_per_hz;
  double q_noise_sigma_db = 0.2;
  double impl_penalty_db = 1.1;
  std::string extrapolation = "reject";
  std::string format = "json";
  std::string out;
};

int cmd_probe(const ProbeArgs& a, std::uint64_t seed) {
  const io::Topology topo = io::topology_from_json(io::read_json_file(a.topology));
  const QuadraticFit fit = io::fit_from_json(io::read_json_file(a.fit));

  std::vector<TransponderConfig> probes = defaults::probes();
  if (!a.probes_file.empty()) {
    probes.clear();
    const json pj = io::read_json_file(a.probes_file);
    if (!pj.is_array()) throw ParseError(a.probes_file + ": expected an array of transponder configs");
    for (const auto& p : pj) probes.push_back(io::config_from_json(p));
  }
  const TransponderConfig* probe = nullptr;
  for (const auto& p : probes)
    if (p.name == a.probe) probe = &p;
  if (!probe) throw ConfigError("unknown probe '" + a.probe + "'");

  const Lightpath& path = topo.lightpath(a.lightpath);
  std::string slot_id = a.slot;
  if (slot_id.empty()) {
    auto it = topo.lightpath_slot.find(path.id);
    if (it == topo.lightpath_slot.end()) throw ConfigError("no --slot given and lightpath has no default slot");
    slot_id = it->second;
  }
  const SpectrumSlot& slot = topo.slot(slot_id);
  const double psd = a.psd_w_per_hz.value_or(build_default_scenario().launch_psd_w_per_hz);
  const LaunchSpec launch{psd, probe->symbol_rate_gbd};

  ProbeOptions opts;
  opts.q_noise_sigma_db = a.q_noise_sigma_db;
  opts.impl_penalty_db = a.impl_penalty_db;
  opts.extrapolation = parse_extrapolation(a.extrapolation);
  const ProbeResult r = run_probe(path, *probe, slot, launch, fit, opts, seed);
  if (a.format == "csv")
    emit(io::probe_csv_header() + io::probe_csv_row(path.id, r, std::nullopt), a.out);
  else
    emit(io::dump(io::to_json(r)), a.out);
  return 0;
}

struct RecommendArgs {
  std::string probe_result;
  std::string catalog;
  double operating_margin_db = 0.0;
  std::string json_out;
};

int cmd_recommend(const RecommendArgs& a) {
  const ProbeResult pr = io::probe_result_from_json(io::read_json_file(a.probe_result));
  const auto catalog = io::catalog_from_json(io::read_json_file(a.catalog));
  const auto rec = recommend(compute_margins(pr.estimated_gsnr_db, catalog, a.operating_margin_db),
                             a.operating_margin_db);
  std::printf("estimated GSNR: %.3f dB (probe %s)\n", pr.estimated_gsnr_db, pr.probe.name.c_str());
  std::printf("operating margin: %.3f dB\n", a.operating_margin_db);
  if (rec.chosen) {
    const auto& best = rec.ranking.front();
    std::printf("recommended: %s (%g Gbit/s, %.1f bit/symbol, %g GBd), margin %.3f dB\n",
                rec.chosen->config.name.c_str(), rec.chosen->config.line_rate_gbps,
                rec.chosen->config.bits_per_symbol, rec.chosen->config.symbol_rate_gbd, best.margin_db);
  } else {
    std::printf("no feasible configuration\n");
  }
  std::printf("\n%s", io::margin_table(rec).c_str());
  if (!a.json_out.empty()) io::write_file(a.json_out, io::dump(io::to_json(rec)));
  return 0;
}

struct ExperimentArgs {
  std::string scenario;
  std::string out_dir;
  std::string figure2;
  std::string emit_scenario;
  bool timestamp = false;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

int cmd_experiment(const ExperimentArgs& a, std::uint64_t seed) {
  if (!a.emit_scenario.empty()) {
    io::write_file(a.emit_scenario, io::dump(io::scenario_to_json(build_default_scenario())));
    if (a.out_dir.empty()) return 0;
  }
  if (a.out_dir.empty()) throw ConfigError("--out-dir is required");
  Scenario sc = a.scenario.empty() ? build_default_scenario() : io::scenario_from_json(io::read_json_file(a.scenario));
  sc.base_seed = seed;
  const ExperimentReport rep = run_experiment(sc);

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  json rj = io::report_to_json(rep);
  rj["base_seed"] = seed;
  if (a.timestamp) rj["generated_at"] = utc_now();
  io::write_file((dir / "report.json").string(), io::dump(rj));
  io::write_file((dir / "probes.csv").string(), io::report_probes_csv(rep));
  io::write_file((dir / "margins.csv").string(), io::report_margins_csv(rep));
  io::write_file((dir / "catalog.json").string(), io::dump(io::catalog_to_json(sc.catalog)));
  const std::string fig2 = a.figure2.empty() ? (dir / "figure2.csv").string() : a.figure2;
  io::write_file(fig2, io::figure2_csv(figure2_rows(rep)));

  const auto& s = rep.summary;
  std::printf("paths: %zu (failed: %zu), seeds: %zu\n", rep.paths.size(), s.failed_paths, sc.seeds.size());
  std::printf("reference probe %s: max |error| %.3f dB, within 0.7 dB: %.1f%%\n", rep.reference_probe.c_str(),
              s.reference_max_abs_error_db, 100.0 * s.reference_within_0p7_fraction);
  std::printf("classifications: TP %zu  FP %zu  TN %zu  FN %zu\n", s.counts.true_positive, s.counts.false_positive,
              s.counts.true_negative, s.counts.false_negative);
  for (const auto& p : rep.paths)
    if (p.error) std::fprintf(stderr, "path %s failed: %s\n", p.label.c_str(), p.error->c_str());
  std::printf("report written to %s\n", a.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Channel probing toolkit: GSNR estimation and transponder configuration selection"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Seed for every random draw (default 0)");

  CharacterizeArgs ca;
  auto* characterize = app.add_subcommand("characterize", "Fit the back-to-back Q-over-OSNR characteristic");
  auto* src = characterize->add_option_group("source");
  src->add_option("--b2b", ca.b2b_csv, "B2B samples CSV (header osnr_db,q_db)")->check(CLI::ExistingFile);
  src->add_option("--synthetic", ca.synthetic_probe, "Synthesize the curve of a built-in probe (PL1..PL4)");
  src->require_option(1);
  characterize->add_option("--out", ca.fit_out, "Fit JSON output")->required();
  characterize->add_option("--samples-out", ca.samples_out, "Write the samples used as CSV");
  characterize->add_option("--impl-penalty", ca.impl_penalty_db, "Synthetic curve implementation penalty [dB]");
  characterize->add_option("--q-noise", ca.q_noise_sigma_db, "Synthetic curve Q noise sigma [dB]");
  characterize->add_option("--osnr-min", ca.sweep.osnr_min_db, "Synthetic sweep start [dB]");
  characterize->add_option("--osnr-max", ca.sweep.osnr_max_db, "Synthetic sweep end [dB]");
  characterize->add_option("--step", ca.sweep.step_db, "Synthetic sweep step [dB]");
  characterize->add_option("--min-samples", ca.min_samples, "Minimum number of samples");

  ProbeArgs pa;
  auto* probe = app.add_subcommand("probe", "Probe a lightpath and estimate its GSNR");
  probe->add_option("--topology", pa.topology, "Topology JSON")->required()->check(CLI::ExistingFile);
  probe->add_option("--fit", pa.fit, "Fit JSON from 'characterize'")->required()->check(CLI::ExistingFile);
  probe->add_option("--probe", pa.probe, "Probe name")->required();
  probe->add_option("--probes", pa.probes_file, "JSON array of probe configs (default PL1..PL4)");
  probe->add_option("--path", pa.lightpath, "Lightpath id")->required();
  probe->add_option("--slot", pa.slot, "Slot id (default: the lightpath's slot)");
  probe->add_option("--psd", pa.psd_w_per_hz, "Launch PSD [W/Hz]");
  probe->add_option("--q-noise", pa.q_noise_sigma_db, "Receiver Q noise sigma [dB]");
  probe->add_option("--impl-penalty", pa.impl_penalty_db, "Probing module implementation penalty [dB]");
  probe->add_option("--extrapolation", pa.extrapolation, "Out-of-range Q handling")
      ->check(CLI::IsMember({"reject", "clamp"}));
  probe->add_option("--format", pa.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  probe->add_option("--out", pa.out, "Output file (default stdout)");

  RecommendArgs ra;
  auto* rec = app.add_subcommand("recommend", "Compute margins and pick the best configuration");
  rec->add_option("--probe-result", ra.probe_result, "Probe result JSON")->required()->check(CLI::ExistingFile);
  rec->add_option("--catalog", ra.catalog, "Catalog JSON")->required()->check(CLI::ExistingFile);
  rec->add_option("--operating-margin", ra.operating_margin_db, "Operating margin [dB]")
      ->check(CLI::NonNegativeNumber);
  rec->add_option("--json", ra.json_out, "Write the recommendation as JSON");

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "Replay the verification experiment");
  exp->add_option("--scenario", ea.scenario, "Scenario JSON (default: built-in scenario)")
      ->check(CLI::ExistingFile);
  exp->add_option("--out-dir", ea.out_dir, "Report directory");
  exp->add_option("--figure2", ea.figure2, "Margin-vs-length CSV path (default <out-dir>/figure2.csv)");
  exp->add_option("--emit-scenario", ea.emit_scenario, "Write the built-in scenario as JSON");
  exp->add_flag("--timestamp", ea.timestamp, "Record the generation time in report.json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*characterize) return cmd_characterize(ca, seed);
    if (*probe) return cmd_probe(pa, seed);
    if (*rec) return cmd_recommend(ra);
    if (*exp) return cmd_experiment(ea, seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
