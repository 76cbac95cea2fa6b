#pragma once

// Probe engine: launch the probe into the slot, read Q, invert the B2B
// characterization to a GOSNR estimate and normalize it to the symbol rate.

#include <cstdint>
#include <optional>

#include "chprobe/error.hpp"
#include "chprobe/link_model.hpp"
#include "chprobe/normalization.hpp"
#include "chprobe/transponder.hpp"

namespace chprobe {

struct ProbeResult {
  TransponderConfig probe;
  SpectrumSlot slot;
  double measured_q_db = 0.0;
  double estimated_gosnr_db = 0.0;  // re 12.5 GHz
  double estimated_gsnr_db = 0.0;   // symbol-rate normalized
  std::uint64_t seed = 0;
};

inline bool is_consistent(const ProbeResult& r) {
  return r.estimated_gsnr_db == normalize_to_gsnr(r.estimated_gosnr_db, r.probe.symbol_rate_gbd);
}

struct ProbeOptions {
  double q_noise_sigma_db = 0.0;
  // Implementation penalty of the probing module (may differ from the
  // characterized one).
  double impl_penalty_db = 0.0;
  // Added to every GOSNR estimate; models an inter-module calibration bias.
  double estimate_bias_db = 0.0;
  // When set, removes a transceiver SNR contribution from the estimate.
  std::optional<double> txrx_backout_snr_db;
  // Transceiver SNR applied in the ground truth seen by the probe.
  std::optional<double> txrx_snr_db;
  Extrapolation extrapolation = Extrapolation::Reject;
};

// Inverts the characterization; the OSNR axis value is read as GOSNR since the
// probe experienced the whole line.
inline double estimate_gosnr(const QuadraticFit& fit, double measured_q_db,
                             Extrapolation policy = Extrapolation::Reject) {
  return invert_fit(fit, measured_q_db, policy);
}

inline ProbeResult run_probe(const Lightpath& path, const TransponderConfig& probe, const SpectrumSlot& slot,
                             const LaunchSpec& launch, const QuadraticFit& fit, const ProbeOptions& opts,
                             std::uint64_t seed) {
  validate(probe);
  validate(slot);
  if (probe.symbol_rate_gbd > slot.width_ghz)
    throw ConfigError("probe '" + probe.name + "' (" + std::to_string(probe.symbol_rate_gbd) +
                      " GBd) does not fit the " + std::to_string(slot.width_ghz) + " GHz slot");
  if (std::abs(launch.signal_bandwidth_ghz - probe.symbol_rate_gbd) > 1e-9)
    throw ConfigError("launch bandwidth must equal the probe symbol rate");

  const double truth = true_gosnr_db(path, launch, slot, opts.txrx_snr_db);
  ProbeResult r;
  r.probe = probe;
  r.slot = slot;
  r.seed = seed;
  r.measured_q_db = rx_q_readout(probe, truth, opts.impl_penalty_db, opts.q_noise_sigma_db, seed);
  double gosnr = estimate_gosnr(fit, r.measured_q_db, opts.extrapolation) + opts.estimate_bias_db;
  if (opts.txrx_backout_snr_db) {
    const double total = db_to_linear(-gosnr);
    const double txrx = db_to_linear(-gsnr_to_gosnr(*opts.txrx_backout_snr_db, probe.symbol_rate_gbd));
    if (total <= txrx) throw DomainError("transceiver back-out exceeds the measured noise");
    gosnr = -linear_to_db(total - txrx);
  }
  r.estimated_gosnr_db = gosnr;
  r.estimated_gsnr_db = normalize_to_gsnr(gosnr, probe.symbol_rate_gbd);
  return r;
}

}  // namespace chprobe
