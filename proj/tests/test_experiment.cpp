#include <gtest/gtest.h>

#include <set>

#include "chprobe/experiment.hpp"
#include "chprobe/io.hpp"

using namespace chprobe;

namespace {

Scenario small_scenario(double sigma, std::size_t seeds) {
  Scenario sc = build_default_scenario();
  sc.q_noise_sigma_db = sigma;
  sc.seeds.resize(seeds);
  return sc;
}

}  // namespace

TEST(DefaultScenario, Shape) {
  const auto sc = build_default_scenario();
  EXPECT_NO_THROW(validate(sc));
  ASSERT_EQ(sc.paths.size(), 6u);
  std::vector<int> spans;
  for (const auto& p : sc.paths) spans.push_back(p.path.total_span_count());
  EXPECT_EQ(spans, (std::vector<int>{13, 22, 37, 47, 61, 72}));
  EXPECT_EQ(sc.paths.back().path.loopback_count, 1);
  EXPECT_EQ(sc.seeds.size(), 200u);
  EXPECT_EQ(sc.reference_probe, "PL2");
  const auto& pl2 = find_probe(sc, "PL2");
  EXPECT_DOUBLE_EQ(pl2.symbol_rate_gbd, 69.0);
  EXPECT_DOUBLE_EQ(pl2.bits_per_symbol, 2.0);
  EXPECT_DOUBLE_EQ(pl2.line_rate_gbps, 200.0);
  for (const auto& p : sc.paths) EXPECT_DOUBLE_EQ(p.slot.width_ghz, 100.0);
}

TEST(DefaultScenario, CatalogCoversRatesAndHalfSteps) {
  const auto sc = build_default_scenario();
  std::set<double> rates, bits;
  for (const auto& s : sc.catalog) {
    rates.insert(s.config.line_rate_gbps);
    bits.insert(s.config.bits_per_symbol);
    EXPECT_LE(s.config.symbol_rate_gbd, 95.0);
    EXPECT_TRUE(is_half_step(s.config.bits_per_symbol));
  }
  EXPECT_EQ(rates, (std::set<double>{100.0, 200.0, 300.0, 400.0}));
  EXPECT_EQ(bits, (std::set<double>{2.0, 2.5, 3.0, 3.5, 4.0}));
  EXPECT_NO_THROW(validate_catalog(sc.catalog));
}

TEST(Experiment, NoiselessRunHasNoMisclassification) {
  auto sc = small_scenario(0.0, 1);
  sc.probe_module_offset_db = 0.0;
  const auto rep = run_experiment(sc);
  EXPECT_EQ(rep.summary.failed_paths, 0u);
  EXPECT_EQ(rep.summary.counts.false_positive, 0u);
  EXPECT_EQ(rep.summary.counts.false_negative, 0u);
  EXPECT_LT(rep.summary.reference_max_abs_error_db, 0.05);
  EXPECT_GT(rep.summary.counts.true_positive, 0u);
  EXPECT_GT(rep.summary.counts.true_negative, 0u);
}

TEST(Experiment, ConstantPsdAcrossVerification) {
  const auto rep = run_experiment(small_scenario(0.2, 3));
  for (const auto& p : rep.paths)
    for (const auto& t : p.truth) EXPECT_EQ(t.launch_psd_w_per_hz, rep.launch_psd_w_per_hz);
}

TEST(Experiment, MeanMarginDecreasesWithLength) {
  const auto rows = figure2_rows(run_experiment(small_scenario(0.2, 20)));
  std::map<std::string, std::vector<double>> by_config;
  for (const auto& r : rows) by_config[r.config].push_back(r.margin_db);
  ASSERT_FALSE(by_config.empty());
  for (const auto& [name, m] : by_config) {
    ASSERT_EQ(m.size(), 6u);
    for (std::size_t i = 1; i < m.size(); ++i) EXPECT_LT(m[i], m[i - 1]) << name;
  }
}

TEST(Experiment, ReproducibleAcrossRuns) {
  const auto sc = small_scenario(0.2, 5);
  EXPECT_EQ(io::dump(io::report_to_json(run_experiment(sc))), io::dump(io::report_to_json(run_experiment(sc))));
  auto other = sc;
  other.base_seed = 1;
  EXPECT_NE(io::report_probes_csv(run_experiment(sc)), io::report_probes_csv(run_experiment(other)));
}

TEST(Experiment, ReferenceDeviationIsZero) {
  const auto rep = run_experiment(small_scenario(0.2, 5));
  for (const auto& d : rep.deviations)
    if (d.probe == "PL2") {
      EXPECT_EQ(d.mean_db, 0.0);
      EXPECT_EQ(d.sigma_db, 0.0);
    }
}

TEST(Experiment, CountsCoverEveryEntry) {
  const auto sc = small_scenario(0.2, 4);
  const auto rep = run_experiment(sc);
  const auto& c = rep.summary.counts;
  EXPECT_EQ(c.true_positive + c.false_positive + c.true_negative + c.false_negative,
            sc.paths.size() * sc.seeds.size() * sc.catalog.size());
  EXPECT_EQ(c.unverified, 0u);
}

TEST(Experiment, FailedPathDoesNotAbortOthers) {
  auto sc = small_scenario(0.0, 1);
  sc.b2b = B2BSweep{19.5, 30.0, 0.5};  // longest paths fall below the characterized range
  const auto rep = run_experiment(sc);
  EXPECT_TRUE(rep.path("5738km").error.has_value());
  EXPECT_FALSE(rep.path("1016km").error.has_value());
  EXPECT_GT(rep.summary.failed_paths, 0u);
  EXPECT_LT(rep.summary.failed_paths, sc.paths.size());
  EXPECT_THROW(rep.path("nowhere"), ConfigError);
}

TEST(Experiment, ProbeSettingComparison) {
  const auto sc = small_scenario(0.0, 1);
  const auto rows = probe_setting_comparison(sc, {"1016km", "1792km"});
  ASSERT_EQ(rows.size(), sc.probes.size());
  for (const auto& r : rows) {
    if (r.probe == "PL2") {
      EXPECT_EQ(r.first.mean_db, 0.0);
    }
    if (r.probe == "PL1") {
      EXPECT_GT(r.first.mean_db, 0.0);
      EXPECT_GT(r.second.mean_db, 0.0);
    }
  }
  EXPECT_THROW(probe_setting_comparison(sc, {"1016km", "9999km"}), ConfigError);
}

TEST(Experiment, ValidationRejectsBrokenScenarios) {
  auto sc = build_default_scenario();
  sc.reference_probe = "PLX";
  EXPECT_THROW(validate(sc), ConfigError);
  sc = build_default_scenario();
  sc.catalog.clear();
  EXPECT_THROW(validate(sc), ConfigError);
  sc = build_default_scenario();
  sc.operating_margin_db = -1.0;
  EXPECT_THROW(validate(sc), DomainError);
  EXPECT_THROW(run_experiment(sc), DomainError);
}
