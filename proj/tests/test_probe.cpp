#include <gtest/gtest.h>

#include <cmath>

#include "chprobe/experiment.hpp"
#include "chprobe/probe.hpp"

using namespace chprobe;

namespace {

struct Bench {
  Scenario sc = build_default_scenario();
  const ScenarioPath& path(std::size_t i) const { return sc.paths[i]; }
  LaunchSpec launch(const TransponderConfig& p) const { return {sc.launch_psd_w_per_hz, p.symbol_rate_gbd}; }
  QuadraticFit fit(const TransponderConfig& p) const {
    return fit_b2b(synthesize_b2b(p, sc.characterized_penalty_db, sc.b2b));
  }
};

ProbeOptions noiseless(double penalty = 1.0) {
  ProbeOptions o;
  o.impl_penalty_db = penalty;
  return o;
}

}  // namespace

TEST(Normalization, ReferenceBandwidthIsIdentity) {
  EXPECT_DOUBLE_EQ(normalize_to_gsnr(20.0, 12.5), 20.0);
}

TEST(Normalization, SymbolRateOffsets) {
  EXPECT_NEAR(normalize_to_gsnr(20.0, 69.0) - 20.0, -7.419390777291989, 1e-12);
  EXPECT_NEAR(normalize_to_gsnr(20.0, 69.0), 12.58, 0.005);
  EXPECT_NEAR(normalize_to_gsnr(20.0, 34.0), 15.654310959658013, 1e-12);
  EXPECT_NEAR(gsnr_to_gosnr(normalize_to_gsnr(17.3, 47.0), 47.0), 17.3, 1e-12);
  EXPECT_THROW(normalize_to_gsnr(20.0, 0.0), DomainError);
  EXPECT_THROW(normalize_to_gsnr(20.0, -3.0), DomainError);
}

TEST(Probe, EstimateFromIdentityFit) {
  const auto fit = fit_b2b({{8.0, 8.0}, {12.0, 12.0}, {20.0, 20.0}, {30.0, 30.0}});
  EXPECT_NEAR(estimate_gosnr(fit, 13.7), 13.7, 1e-9);
}

TEST(Probe, NoiselessClosureOnEveryPath) {
  Bench s;
  for (std::size_t i = 0; i < s.sc.paths.size(); ++i) {
    for (const auto& p : s.sc.probes) {
      const auto samples = synthesize_b2b(p, 1.0, s.sc.b2b);
      const auto fit = fit_b2b(samples);
      const auto r = run_probe(s.path(i).path, p, s.path(i).slot, s.launch(p), fit, noiseless(), 3);
      const double truth = true_gosnr_db(s.path(i).path, s.launch(p), s.path(i).slot);
      const double bound = p.name == "PL2" || p.name == "PL1" ? 0.05 : osnr_residual_bound_db(fit, samples) + 1e-9;
      EXPECT_NEAR(r.estimated_gsnr_db, truth, bound) << s.path(i).label << " " << p.name;
    }
  }
}

TEST(Probe, ResultIsSelfConsistent) {
  Bench s;
  const auto& p = find_probe(s.sc, "PL3");
  ProbeOptions o = noiseless(1.1);
  o.q_noise_sigma_db = 0.2;
  const auto r = run_probe(s.path(1).path, p, s.path(1).slot, s.launch(p), s.fit(p), o, 11);
  EXPECT_TRUE(is_consistent(r));
  EXPECT_EQ(r.seed, 11u);
  EXPECT_EQ(r.slot, s.path(1).slot);
  EXPECT_EQ(r.probe.name, "PL3");
}

TEST(Probe, SymbolRateInvariantWithoutNonlinearity) {
  Bench s;
  Lightpath linear = s.path(2).path;
  for (auto& sp : linear.spans) sp.gamma_per_w_km = 0.0;
  const auto& pl1 = find_probe(s.sc, "PL1");
  const auto& pl2 = find_probe(s.sc, "PL2");
  const auto a = run_probe(linear, pl1, s.path(2).slot, s.launch(pl1), s.fit(pl1), noiseless(), 0);
  const auto b = run_probe(linear, pl2, s.path(2).slot, s.launch(pl2), s.fit(pl2), noiseless(), 0);
  // Constant PSD: the ASE-limited GSNR does not depend on the symbol rate.
  EXPECT_NEAR(a.estimated_gsnr_db, b.estimated_gsnr_db, 1e-9);
}

TEST(Probe, NarrowProbeOverestimatesWithNonlinearity) {
  Bench s;
  const auto& pl1 = find_probe(s.sc, "PL1");
  const auto& pl2 = find_probe(s.sc, "PL2");
  for (std::size_t i = 0; i < s.sc.paths.size(); ++i) {
    const auto& sp = s.path(i);
    const auto a = run_probe(sp.path, pl1, sp.slot, s.launch(pl1), s.fit(pl1), noiseless(), 0);
    const auto b = run_probe(sp.path, pl2, sp.slot, s.launch(pl2), s.fit(pl2), noiseless(), 0);
    const double expected =
        true_gosnr_db(sp.path, s.launch(pl1), sp.slot) - true_gosnr_db(sp.path, s.launch(pl2), sp.slot);
    EXPECT_GT(expected, 0.0);
    EXPECT_NEAR(a.estimated_gsnr_db - b.estimated_gsnr_db, expected, 1e-9) << sp.label;
  }
}

TEST(Probe, DeterministicPerSeed) {
  Bench s;
  const auto& p = find_probe(s.sc, "PL4");
  ProbeOptions o = noiseless(1.1);
  o.q_noise_sigma_db = 0.2;
  const auto a = run_probe(s.path(0).path, p, s.path(0).slot, s.launch(p), s.fit(p), o, 5);
  const auto b = run_probe(s.path(0).path, p, s.path(0).slot, s.launch(p), s.fit(p), o, 5);
  const auto c = run_probe(s.path(0).path, p, s.path(0).slot, s.launch(p), s.fit(p), o, 6);
  EXPECT_EQ(a.measured_q_db, b.measured_q_db);
  EXPECT_EQ(a.estimated_gsnr_db, b.estimated_gsnr_db);
  EXPECT_NE(a.measured_q_db, c.measured_q_db);
}

TEST(Probe, OutOfRangeQRaisesExtrapolation) {
  Bench s;
  const auto& p = find_probe(s.sc, "PL2");
  const auto narrow = fit_b2b(synthesize_b2b(p, 1.0, B2BSweep{20.0, 30.0, 1.0}));
  const auto& sp = s.path(5);
  EXPECT_THROW(run_probe(sp.path, p, sp.slot, s.launch(p), narrow, noiseless(), 0), ExtrapolationError);
  ProbeOptions clamp = noiseless();
  clamp.extrapolation = Extrapolation::Clamp;
  const auto r = run_probe(sp.path, p, sp.slot, s.launch(p), narrow, clamp, 0);
  EXPECT_DOUBLE_EQ(r.estimated_gosnr_db, 20.0);
}

TEST(Probe, SlotAndLaunchMustFit) {
  Bench s;
  const auto& p = find_probe(s.sc, "PL2");
  const auto& sp = s.path(0);
  EXPECT_THROW(run_probe(sp.path, p, SpectrumSlot{193.4, 50.0}, s.launch(p), s.fit(p), noiseless(), 0), ConfigError);
  EXPECT_THROW(run_probe(sp.path, p, sp.slot, LaunchSpec{s.sc.launch_psd_w_per_hz, 34.0}, s.fit(p), noiseless(), 0),
               ConfigError);
}

TEST(Probe, CalibrationBiasShiftsEstimate) {
  Bench s;
  const auto& p = find_probe(s.sc, "PL4");
  const auto& sp = s.path(1);
  const auto base = run_probe(sp.path, p, sp.slot, s.launch(p), s.fit(p), noiseless(), 0);
  for (double bias : {-0.3, 0.2, 0.5}) {
    ProbeOptions o = noiseless();
    o.estimate_bias_db = bias;
    const auto r = run_probe(sp.path, p, sp.slot, s.launch(p), s.fit(p), o, 0);
    EXPECT_NEAR(r.estimated_gsnr_db - base.estimated_gsnr_db, bias, 1e-12);
  }
}

TEST(Probe, TransceiverBackOutRecoversLineGsnr) {
  Bench s;
  const auto& p = find_probe(s.sc, "PL2");
  const auto& sp = s.path(0);
  ProbeOptions o = noiseless();
  o.txrx_snr_db = 24.0;
  const auto degraded = run_probe(sp.path, p, sp.slot, s.launch(p), s.fit(p), o, 0);
  o.txrx_backout_snr_db = 24.0;
  const auto restored = run_probe(sp.path, p, sp.slot, s.launch(p), s.fit(p), o, 0);
  const double line = true_gosnr_db(sp.path, s.launch(p), sp.slot);
  EXPECT_LT(degraded.estimated_gsnr_db, line - 0.1);
  EXPECT_NEAR(restored.estimated_gsnr_db, line, 1e-6);
}

TEST(Probe, DenserFormatSpreadMatchesSlopeRatio) {
  // sigma(estimate) ~ sigma_Q / slope: predicted ordering of PL4 vs PL2 holds empirically.
  Bench s;
  const auto& sp = s.path(0);
  ProbeOptions o = noiseless(1.1);
  o.q_noise_sigma_db = 0.2;
  auto spread = [&](const TransponderConfig& p) {
    double m = 0.0, m2 = 0.0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
      const double e = run_probe(sp.path, p, sp.slot, s.launch(p), s.fit(p), o, derive_seed({9, std::uint64_t(i)}))
                           .estimated_gosnr_db;
      m += e;
      m2 += e * e;
    }
    return std::sqrt(m2 / n - (m / n) * (m / n));
  };
  const auto& pl2 = find_probe(s.sc, "PL2");
  const auto& pl4 = find_probe(s.sc, "PL4");
  const auto f2 = s.fit(pl2), f4 = s.fit(pl4);
  const double x2 = estimate_gosnr(f2, rx_q_readout(pl2, true_gosnr_db(sp.path, s.launch(pl2), sp.slot), 1.1, 0, 0));
  const double x4 = estimate_gosnr(f4, rx_q_readout(pl4, true_gosnr_db(sp.path, s.launch(pl4), sp.slot), 1.1, 0, 0));
  const bool predicted = f4.slope_at(x4) < f2.slope_at(x2);
  EXPECT_EQ(spread(pl4) > spread(pl2), predicted);
}
