#include <gtest/gtest.h>

#include "chprobe/experiment.hpp"
#include "chprobe/io.hpp"

using namespace chprobe;
using io::json;

namespace {

json sample_topology() {
  return json::parse(R"({
    "spans": {"ssmf80": {"length_km": 80, "attenuation_db_per_km": 0.2, "gamma_per_w_km": 1.3,
                          "beta2_ps2_per_km": -21.3, "amp_gain_db": 0, "amp_noise_figure_db": 4.5}},
    "slots": {"ch1": {"center_freq_thz": 193.9, "width_ghz": 100}},
    "lightpaths": [{"id": "a", "spans": [{"span": "ssmf80", "count": 12}, "ssmf80"],
                    "add_drop_loss_db": 6, "loopback_count": 1, "slot": "ch1"}]
  })");
}

}  // namespace

TEST(Io, TopologyParses) {
  const auto t = io::topology_from_json(sample_topology());
  const auto& p = t.lightpath("a");
  EXPECT_EQ(p.spans.size(), 13u);
  EXPECT_EQ(p.loopback_count, 1);
  EXPECT_DOUBLE_EQ(p.add_drop_loss_db, 6.0);
  EXPECT_EQ(t.lightpath_slot.at("a"), "ch1");
  EXPECT_DOUBLE_EQ(t.slot("ch1").center_freq_thz, 193.9);
  EXPECT_THROW(t.lightpath("b"), ConfigError);
}

TEST(Io, UnknownFieldsRejected) {
  auto j = sample_topology();
  j["spans"]["ssmf80"]["colour"] = "yellow";
  EXPECT_THROW(io::topology_from_json(j), ParseError);
  j = sample_topology();
  j["lightpaths"][0]["owner"] = "x";
  EXPECT_THROW(io::topology_from_json(j), ParseError);
  j = sample_topology();
  j["version"] = 2;
  EXPECT_THROW(io::topology_from_json(j), ParseError);
}

TEST(Io, TopologyReferenceErrors) {
  auto j = sample_topology();
  j["lightpaths"][0]["spans"] = json::array({"missing"});
  EXPECT_THROW(io::topology_from_json(j), ParseError);
  j = sample_topology();
  j["lightpaths"][0]["slot"] = "nope";
  EXPECT_THROW(io::topology_from_json(j), ParseError);
  j = sample_topology();
  j["spans"]["ssmf80"]["amp_noise_figure_db"] = 2.0;
  EXPECT_THROW(io::topology_from_json(j), DomainError);
  j["min_noise_figure_db"] = 1.5;
  EXPECT_NO_THROW(io::topology_from_json(j));
}

TEST(Io, TopologyRoundTrip) {
  const auto sc = build_default_scenario();
  std::vector<Lightpath> paths;
  std::vector<SpectrumSlot> slots;
  for (const auto& p : sc.paths) {
    paths.push_back(p.path);
    slots.push_back(p.slot);
  }
  const auto t = io::topology_from_json(io::topology_to_json(paths, slots));
  ASSERT_EQ(t.lightpaths.size(), paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    EXPECT_EQ(t.lightpaths[i].spans, paths[i].spans);
    EXPECT_EQ(t.lightpaths[i].loopback_count, paths[i].loopback_count);
    EXPECT_EQ(t.slot(t.lightpath_slot.at(paths[i].id)), slots[i]);
  }
  EXPECT_EQ(t.spans.size(), 1u);  // identical spans are shared
}

TEST(Io, CatalogFromRuleFillsThresholds) {
  const auto c = io::catalog_from_json(json::parse(R"({"impl_penalty_db": 1.0, "formats": [
      {"name": "a", "bits_per_symbol": 2, "symbol_rate_gbd": 69, "line_rate_gbps": 200},
      {"name": "b", "bits_per_symbol": 4, "symbol_rate_gbd": 69, "line_rate_gbps": 400,
       "required_gsnr_typical_db": 13.8}]})"));
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].required_gsnr_typical_db,
            spec_from_fec_limit(c[0].config, 1.0).required_gsnr_typical_db);
  EXPECT_DOUBLE_EQ(c[1].required_gsnr_typical_db, 13.8);
  EXPECT_DOUBLE_EQ(c[1].required_gsnr_worst_db, 14.8);
  EXPECT_THROW(io::catalog_from_json(json::array()), ConfigError);
  EXPECT_THROW(io::catalog_from_json(json::parse(R"([{"name": "a", "bits_per_symbol": 2.2,
      "symbol_rate_gbd": 69, "line_rate_gbps": 200}])")), DomainError);
}

TEST(Io, CatalogRoundTrip) {
  const auto c = defaults::catalog();
  const auto back = io::catalog_from_json(json::parse(io::catalog_to_json(c).dump()));
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(back[i].config.name, c[i].config.name);
    EXPECT_EQ(back[i].required_gsnr_typical_db, c[i].required_gsnr_typical_db);
  }
}

TEST(Io, SamplesCsv) {
  const auto s = io::samples_from_csv("osnr_db,q_db\n10,5.5\n 11 , 6.25\n\n12,7\n");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s[1].q_db, 6.25);
  EXPECT_EQ(io::samples_from_csv(io::samples_to_csv(s)).size(), 3u);
}

TEST(Io, MalformedSamplesRejected) {
  auto message = [](const std::string& text) {
    try {
      io::samples_from_csv(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("osnr_db\n10\n11\n").find("malformed sample"), std::string::npos);
  EXPECT_NE(message("osnr_db,q_db\n10\n").find("malformed sample"), std::string::npos);
  EXPECT_NE(message("osnr_db,q_db\n10,5,1\n").find("malformed sample"), std::string::npos);
  EXPECT_NE(message("osnr_db,q_db\n10,abc\n").find("malformed sample"), std::string::npos);
  EXPECT_NE(message("").find("empty"), std::string::npos);
}

TEST(Io, FitRoundTripIsExact) {
  const auto fit = fit_b2b(synthesize_b2b({"PL4", 4.0, 69.0, 400.0}, 1.0));
  const auto back = io::fit_from_json(json::parse(io::to_json(fit).dump()));
  EXPECT_EQ(back.a, fit.a);
  EXPECT_EQ(back.b, fit.b);
  EXPECT_EQ(back.c, fit.c);
  EXPECT_EQ(back.osnr_min_db, fit.osnr_min_db);
}

TEST(Io, ProbeResultRoundTripAndConsistency) {
  ProbeResult r;
  r.probe = {"PL2", 2.0, 69.0, 200.0};
  r.slot = {193.9, 100.0};
  r.measured_q_db = 10.1;
  r.estimated_gosnr_db = 21.4;
  r.estimated_gsnr_db = normalize_to_gsnr(21.4, 69.0);
  r.seed = 12;
  auto j = json::parse(io::to_json(r).dump());
  const auto back = io::probe_result_from_json(j);
  EXPECT_EQ(back.estimated_gsnr_db, r.estimated_gsnr_db);
  EXPECT_EQ(back.seed, 12u);
  j["estimated_gsnr_db"] = 21.4;
  EXPECT_THROW(io::probe_result_from_json(j), ParseError);
}

TEST(Io, ScenarioRoundTripReproducesReport) {
  auto sc = build_default_scenario();
  sc.seeds.resize(3);
  const auto back = io::scenario_from_json(json::parse(io::dump(io::scenario_to_json(sc))));
  EXPECT_EQ(io::dump(io::scenario_to_json(back)), io::dump(io::scenario_to_json(sc)));
  EXPECT_EQ(io::dump(io::report_to_json(run_experiment(back))), io::dump(io::report_to_json(run_experiment(sc))));
}

TEST(Io, ScenarioRejectsUnknownKeys) {
  auto j = io::scenario_to_json(build_default_scenario());
  j["extra"] = 1;
  EXPECT_THROW(io::scenario_from_json(j), ParseError);
}

TEST(Io, NumberFormattingRoundTrips) {
  for (double v : {0.1, 12.58, -7.419390777291989, 1e-15, 123456.789, 0.0})
    EXPECT_EQ(std::stod(io::fmt(v)), v) << io::fmt(v);
}
