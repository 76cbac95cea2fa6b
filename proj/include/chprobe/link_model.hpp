#pragma once

// Synthetic ground-truth physical layer: ASE accumulation over EDFA-amplified
// spans plus a closed-form Gaussian-noise estimate of self-channel nonlinear
// interference. Every function is pure.

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "chprobe/error.hpp"
#include "chprobe/normalization.hpp"
#include "chprobe/units.hpp"

namespace chprobe {

inline constexpr double kMinPhysicalNoiseFigureDb = 3.0;
inline constexpr double kCBandMinThz = 191.0;
inline constexpr double kCBandMaxThz = 196.0;

// Returned by snr_nli_db when no span contributes nonlinear interference.
inline constexpr double kNoNliSnrDb = std::numeric_limits<double>::infinity();

struct FiberSpan {
  double length_km = 80.0;
  double attenuation_db_per_km = 0.2;
  double gamma_per_w_km = 1.3;
  double beta2_ps2_per_km = -21.3;
  // 0 selects the transparent gain (span loss); any other value must match it.
  double amp_gain_db = 0.0;
  double amp_noise_figure_db = 5.0;
  // Optional NLI PSD from co-propagating traffic, added per span.
  double extra_nli_psd_w_per_hz = 0.0;

  double loss_db() const { return length_km * attenuation_db_per_km; }

  friend bool operator==(const FiberSpan&, const FiberSpan&) = default;
};

struct Lightpath {
  std::string id;
  std::vector<FiberSpan> spans;
  double add_drop_loss_db = 0.0;
  int loopback_count = 0;

  int traversals() const { return loopback_count + 1; }

  double base_length_km() const {
    return std::accumulate(spans.begin(), spans.end(), 0.0,
                           [](double acc, const FiberSpan& s) { return acc + s.length_km; });
  }
  double total_length_km() const { return traversals() * base_length_km(); }
  int total_span_count() const { return traversals() * static_cast<int>(spans.size()); }
};

struct SpectrumSlot {
  double center_freq_thz = 193.4;
  double width_ghz = 100.0;

  friend bool operator==(const SpectrumSlot&, const SpectrumSlot&) = default;
};

struct LaunchSpec {
  double psd_w_per_hz = 1e-3 / 69e9;
  double signal_bandwidth_ghz = 69.0;

  double channel_power_w() const { return psd_w_per_hz * signal_bandwidth_ghz * 1e9; }
};

inline void validate(const FiberSpan& span, double min_noise_figure_db = kMinPhysicalNoiseFigureDb) {
  if (!(span.length_km > 0.0)) throw DomainError("span length must be positive");
  if (!(span.attenuation_db_per_km > 0.0)) throw DomainError("span attenuation must be positive");
  if (!(span.gamma_per_w_km >= 0.0)) throw DomainError("nonlinear coefficient must be non-negative");
  if (!std::isfinite(span.beta2_ps2_per_km)) throw DomainError("dispersion must be finite");
  if (!(span.amp_gain_db >= 0.0)) throw DomainError("amplifier gain must be non-negative");
  if (!(span.extra_nli_psd_w_per_hz >= 0.0)) throw DomainError("extra NLI PSD must be non-negative");
  if (!(min_noise_figure_db > 0.0)) throw DomainError("noise figure bound must be positive");
  if (!(span.amp_noise_figure_db >= min_noise_figure_db))
    throw DomainError("amplifier noise figure below " + std::to_string(min_noise_figure_db) + " dB");
}

inline void validate(const Lightpath& path, double min_noise_figure_db = kMinPhysicalNoiseFigureDb) {
  if (path.spans.empty()) throw DomainError("lightpath '" + path.id + "' has no spans");
  if (!(path.add_drop_loss_db >= 0.0)) throw DomainError("add/drop loss must be non-negative");
  if (path.loopback_count < 0) throw DomainError("loopback count must be non-negative");
  for (const auto& s : path.spans) validate(s, min_noise_figure_db);
}

inline void validate(const SpectrumSlot& slot) {
  if (!(slot.center_freq_thz >= kCBandMinThz && slot.center_freq_thz <= kCBandMaxThz))
    throw DomainError("slot center frequency outside the C-band");
  if (!(slot.width_ghz > 0.0)) throw DomainError("slot width must be positive");
}

inline void validate(const LaunchSpec& launch) {
  if (!(launch.psd_w_per_hz > 0.0) || !(launch.signal_bandwidth_ghz > 0.0) ||
      !(launch.channel_power_w() > 0.0))
    throw DomainError("launch channel power must be positive");
}

namespace detail {

// Gain of the amplifier closing span `index` of a traversal. The first
// amplifier of each traversal also restores the add/drop loss.
inline double transparent_gain_db(const Lightpath& path, std::size_t index) {
  const FiberSpan& s = path.spans[index];
  if (s.amp_gain_db > 0.0 && std::abs(s.amp_gain_db - s.loss_db()) > 1e-6)
    throw DomainError("amplifier gain " + std::to_string(s.amp_gain_db) +
                      " dB does not restore span loss " + std::to_string(s.loss_db()) + " dB");
  return s.loss_db() + (index == 0 ? path.add_drop_loss_db : 0.0);
}

}  // namespace detail

// Total ASE power in the 12.5 GHz reference bandwidth [W].
inline double ase_noise_power_w(const Lightpath& path, const SpectrumSlot& slot) {
  if (path.spans.empty()) throw DomainError("lightpath '" + path.id + "' has no spans");
  validate(slot);
  const double photon = kPlanck * slot.center_freq_thz * 1e12 * kRefBandwidthGhz * 1e9;
  double per_traversal = 0.0;
  for (std::size_t i = 0; i < path.spans.size(); ++i) {
    const double gain = db_to_linear(detail::transparent_gain_db(path, i));
    per_traversal += db_to_linear(path.spans[i].amp_noise_figure_db) * photon * (gain - 1.0);
  }
  return path.traversals() * per_traversal;
}

// OSNR from ASE only, dB re 12.5 GHz.
inline double osnr_ase_db(const Lightpath& path, const LaunchSpec& launch, const SpectrumSlot& slot) {
  validate(launch);
  return linear_to_db(launch.channel_power_w() / ase_noise_power_w(path, slot));
}

// Closed-form GN self-channel NLI PSD of one span [W/Hz] for a flat signal of
// PSD `psd_w_per_hz` over `bandwidth_hz`.
inline double span_nli_psd(const FiberSpan& span, double psd_w_per_hz, double bandwidth_hz) {
  if (span.beta2_ps2_per_km == 0.0) throw DomainError("zero-dispersion span unsupported");
  const double alpha = field_attenuation_per_km(span.attenuation_db_per_km);
  const double l_eff = (1.0 - std::exp(-2.0 * alpha * span.length_km)) / (2.0 * alpha);
  const double l_eff_asym = 1.0 / (2.0 * alpha);
  const double beta2 = std::abs(span.beta2_ps2_per_km) * 1e-24;  // s^2/km
  const double gamma = span.gamma_per_w_km;
  const double arg = kPi * kPi / 2.0 * beta2 * l_eff_asym * bandwidth_hz * bandwidth_hz;
  return 8.0 / 27.0 * gamma * gamma * psd_w_per_hz * psd_w_per_hz * psd_w_per_hz * l_eff * l_eff *
             std::asinh(arg) / (kPi * beta2 * l_eff_asym) +
         span.extra_nli_psd_w_per_hz;
}

// Incoherent sum of per-span NLI PSDs over the whole path (loopbacks included).
inline double nli_psd_w_per_hz(const Lightpath& path, const LaunchSpec& launch) {
  if (path.spans.empty()) throw DomainError("lightpath '" + path.id + "' has no spans");
  validate(launch);
  double total = 0.0;
  for (const auto& s : path.spans)
    total += span_nli_psd(s, launch.psd_w_per_hz, launch.signal_bandwidth_ghz * 1e9);
  return path.traversals() * total;
}

// Signal-to-NLI ratio in dB; kNoNliSnrDb when the path is linear.
inline double snr_nli_db(const Lightpath& path, const LaunchSpec& launch, const SpectrumSlot& slot) {
  validate(slot);
  const double g_nli = nli_psd_w_per_hz(path, launch);
  if (g_nli == 0.0) return kNoNliSnrDb;
  return linear_to_db(launch.psd_w_per_hz / g_nli);
}

struct LinkBudget {
  double osnr_ase_db = 0.0;  // re 12.5 GHz
  double snr_ase_db = 0.0;   // referred to the signal bandwidth
  double snr_nli_db = kNoNliSnrDb;
  std::optional<double> txrx_snr_db;
  double gsnr_db = 0.0;
};

inline LinkBudget link_budget(const Lightpath& path, const LaunchSpec& launch, const SpectrumSlot& slot,
                              std::optional<double> txrx_snr_db = std::nullopt) {
  LinkBudget b;
  b.osnr_ase_db = osnr_ase_db(path, launch, slot);
  b.snr_ase_db = normalize_to_gsnr(b.osnr_ase_db, launch.signal_bandwidth_ghz);
  b.snr_nli_db = snr_nli_db(path, launch, slot);
  b.txrx_snr_db = txrx_snr_db;
  b.gsnr_db = txrx_snr_db ? combine_snr_db(b.snr_ase_db, b.snr_nli_db, *txrx_snr_db)
                          : combine_snr_db(b.snr_ase_db, b.snr_nli_db);
  return b;
}

// Ground-truth GSNR of the slot, referred to the signal bandwidth.
inline double true_gosnr_db(const Lightpath& path, const LaunchSpec& launch, const SpectrumSlot& slot,
                            std::optional<double> txrx_snr_db = std::nullopt) {
  return link_budget(path, launch, slot, txrx_snr_db).gsnr_db;
}

}  // namespace chprobe
