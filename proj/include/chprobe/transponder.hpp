#pragma once

// Transponder modelling: receiver Q from SNR for DP-QAM formats, the
// back-to-back Q-over-OSNR characterization, its quadratic fit and inversion.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "chprobe/error.hpp"
#include "chprobe/normalization.hpp"
#include "chprobe/random.hpp"
#include "chprobe/units.hpp"

namespace chprobe {

// Q readings at or below this value are reported as the floor.
inline constexpr double kQFloorDb = -20.0;
inline constexpr double kDefaultFecBerThreshold = 2e-2;
inline constexpr double kDefaultWorstCaseDeltaDb = 1.0;
inline constexpr double kMinBitsPerSymbol = 2.0;
inline constexpr double kMaxBitsPerSymbol = 6.0;

struct TransponderConfig {
  std::string name;
  double bits_per_symbol = 2.0;  // per polarization, multiple of 0.5
  double symbol_rate_gbd = 69.0;
  double line_rate_gbps = 200.0;

  double raw_rate_gbps() const { return 2.0 * bits_per_symbol * symbol_rate_gbd; }

  friend bool operator==(const TransponderConfig&, const TransponderConfig&) = default;
};

struct ModFormatSpec {
  TransponderConfig config;
  double required_gsnr_typical_db = 0.0;
  double required_gsnr_worst_db = 0.0;

  friend bool operator==(const ModFormatSpec&, const ModFormatSpec&) = default;
};

struct QOverOsnrSample {
  double osnr_db = 0.0;
  double q_db = 0.0;
};

// q_db = a*x^2 + b*x + c with x = osnr_db, valid on [osnr_min_db, osnr_max_db].
struct QuadraticFit {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;
  double osnr_min_db = 0.0;
  double osnr_max_db = 0.0;
  double residual_rms_db = 0.0;

  double q_at(double osnr_db) const { return (a * osnr_db + b) * osnr_db + c; }
  double slope_at(double osnr_db) const { return 2.0 * a * osnr_db + b; }
  double q_min_db() const { return q_at(osnr_min_db); }
  double q_max_db() const { return q_at(osnr_max_db); }
  bool is_monotonic() const { return slope_at(osnr_min_db) > 0.0 && slope_at(osnr_max_db) > 0.0; }
};

inline bool is_half_step(double bits) {
  const double twice = 2.0 * bits;
  return bits > 0.0 && std::abs(twice - std::round(twice)) < 1e-9;
}

inline void validate(const TransponderConfig& cfg) {
  if (!is_half_step(cfg.bits_per_symbol))
    throw DomainError("bits per symbol must be a positive multiple of 0.5 (got " +
                      std::to_string(cfg.bits_per_symbol) + ")");
  if (!(cfg.symbol_rate_gbd > 0.0)) throw DomainError("symbol rate must be positive");
  if (!(cfg.line_rate_gbps > 0.0)) throw DomainError("line rate must be positive");
  if (cfg.line_rate_gbps > cfg.raw_rate_gbps() * (1.0 + 1e-12))
    throw DomainError("line rate of '" + cfg.name + "' exceeds the raw dual-polarization rate");
}

inline void validate(const ModFormatSpec& spec) {
  validate(spec.config);
  if (!std::isfinite(spec.required_gsnr_typical_db) || !std::isfinite(spec.required_gsnr_worst_db))
    throw DomainError("required GSNR thresholds must be finite");
  if (spec.required_gsnr_worst_db < spec.required_gsnr_typical_db)
    throw DomainError("worst-case GSNR of '" + spec.config.name + "' is below its typical value");
}

// Typical thresholds must not decrease with bits/symbol at a fixed symbol rate.
inline void validate_catalog(const std::vector<ModFormatSpec>& catalog) {
  for (const auto& s : catalog) validate(s);
  for (const auto& x : catalog)
    for (const auto& y : catalog)
      if (x.config.symbol_rate_gbd == y.config.symbol_rate_gbd &&
          x.config.bits_per_symbol < y.config.bits_per_symbol &&
          x.required_gsnr_typical_db > y.required_gsnr_typical_db)
        throw DomainError("catalog thresholds decrease with bits/symbol ('" + x.config.name +
                          "' vs '" + y.config.name + "')");
}

namespace detail {

inline constexpr double kSqrtPi = 1.7724538509055160273;

// log(erfc(x)), usable far into the tail where erfc underflows.
inline double log_erfc(double x) {
  if (x < 25.0) return std::log(std::erfc(x));
  const double inv2 = 1.0 / (x * x);
  const double series = 1.0 - 0.5 * inv2 + 0.75 * inv2 * inv2 - 1.875 * inv2 * inv2 * inv2;
  return -x * x - std::log(x * kSqrtPi) + std::log(series);
}

// Solves log(erfc(y)) = log_target for y; log_target must be below log(2).
inline double erfc_inv_from_log(double log_target) {
  double lo = -7.0;
  double hi = std::max(8.0, std::sqrt(std::max(0.0, -log_target)) + 4.0);
  double y = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = log_erfc(y) - log_target;  // decreasing in y
    if (f > 0.0) lo = y; else hi = y;
    const double deriv = -2.0 / kSqrtPi * std::exp(-y * y - log_erfc(y));
    double next = y - f / deriv;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - y) <= 1e-15 * std::max(1.0, std::abs(y))) return next;
    y = next;
  }
  return y;
}

// BER = k * erfc(sqrt(kappa * snr)) for square/cross M-QAM with M = 2^bits.
struct QamBerModel {
  double k;
  double kappa;
};

inline QamBerModel qam_model(int bits) {
  const double m = std::ldexp(1.0, bits);
  return {2.0 / bits * (1.0 - 1.0 / std::sqrt(m)), 3.0 / (2.0 * (m - 1.0))};
}

inline void check_bits(double bits) {
  if (!is_half_step(bits) || bits < kMinBitsPerSymbol || bits > kMaxBitsPerSymbol)
    throw DomainError("unsupported bits per symbol " + std::to_string(bits));
}

// Receiver Q (linear) of an integer-bit format at linear SNR.
inline double q_linear_integer(int bits, double snr_lin) {
  const auto [k, kappa] = qam_model(bits);
  const double log_two_ber = std::log(2.0 * k) + log_erfc(std::sqrt(kappa * snr_lin));
  if (log_two_ber >= 0.0) return 0.0;  // BER >= 0.5
  return std::sqrt(2.0) * erfc_inv_from_log(log_two_ber);
}

// SNR [dB] an integer-bit format needs to reach linear Q `q_lin`.
inline double required_snr_db_integer(int bits, double q_lin) {
  const auto [k, kappa] = qam_model(bits);
  const double log_erfc_x = log_erfc(q_lin / std::sqrt(2.0)) - std::log(2.0 * k);
  if (log_erfc_x >= 0.0) return -std::numeric_limits<double>::infinity();
  const double x = erfc_inv_from_log(log_erfc_x);
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return linear_to_db(x * x / kappa);
}

inline double q_lin_from_ber(double ber) {
  if (!(ber > 0.0) || ber >= 0.5) throw DomainError("BER must lie in (0, 0.5)");
  return std::sqrt(2.0) * erfc_inv_from_log(std::log(2.0 * ber));
}

}  // namespace detail

inline double q_db_from_ber(double ber) { return 20.0 * std::log10(detail::q_lin_from_ber(ber)); }

// SNR per symbol [dB] at which the format reaches `ber`; half-integer formats
// interpolate linearly (in dB) between the neighbouring integer formats.
inline double required_snr_db(double bits_per_symbol, double ber) {
  detail::check_bits(bits_per_symbol);
  const double q_lin = detail::q_lin_from_ber(ber);
  const int lo = static_cast<int>(std::floor(bits_per_symbol));
  const double t = bits_per_symbol - lo;
  if (t == 0.0) return detail::required_snr_db_integer(lo, q_lin);
  return (1.0 - t) * detail::required_snr_db_integer(lo, q_lin) +
         t * detail::required_snr_db_integer(lo + 1, q_lin);
}

// Theoretical receiver Q [dB, 20*log10(Q)] for a DP-QAM format at `snr_db`.
inline double theoretical_q_db(double bits_per_symbol, double snr_db) {
  detail::check_bits(bits_per_symbol);
  if (std::isnan(snr_db)) throw DomainError("SNR is NaN");
  const int lo = static_cast<int>(std::floor(bits_per_symbol));
  const double t = bits_per_symbol - lo;
  if (t == 0.0) {
    const double q = detail::q_linear_integer(lo, db_to_linear(snr_db));
    if (q <= 0.0) return kQFloorDb;
    return std::max(kQFloorDb, 20.0 * std::log10(q));
  }
  // Find the Q whose interpolated required SNR equals snr_db.
  auto required = [&](double q_db) {
    const double q_lin = std::pow(10.0, q_db / 20.0);
    return (1.0 - t) * detail::required_snr_db_integer(lo, q_lin) +
           t * detail::required_snr_db_integer(lo + 1, q_lin);
  };
  double q_lo = kQFloorDb;
  double q_hi = std::max(0.0, snr_db + 10.0);
  if (required(q_lo) >= snr_db) return kQFloorDb;
  for (int it = 0; it < 200 && q_hi - q_lo > 1e-13; ++it) {
    const double mid = 0.5 * (q_lo + q_hi);
    if (required(mid) < snr_db) q_lo = mid; else q_hi = mid;
  }
  return 0.5 * (q_lo + q_hi);
}

// Required GSNR thresholds from the FEC-limit rule: theoretical SNR at the
// pre-FEC BER plus the implementation penalty; worst case adds a fixed delta.
inline ModFormatSpec spec_from_fec_limit(const TransponderConfig& cfg, double impl_penalty_db,
                                         double fec_ber = kDefaultFecBerThreshold,
                                         double worst_delta_db = kDefaultWorstCaseDeltaDb) {
  validate(cfg);
  ModFormatSpec spec{cfg, 0.0, 0.0};
  spec.required_gsnr_typical_db = required_snr_db(cfg.bits_per_symbol, fec_ber) + impl_penalty_db;
  spec.required_gsnr_worst_db = spec.required_gsnr_typical_db + worst_delta_db;
  return spec;
}

struct FitOptions {
  std::size_t min_samples = 4;
  double min_spread_db = 3.0;
};

// Ordinary least-squares quadratic through the B2B samples. The solve runs on
// centered, scaled abscissae to keep the normal equations well conditioned.
inline QuadraticFit fit_b2b(const std::vector<QOverOsnrSample>& samples, const FitOptions& opts = {}) {
  if (samples.size() < std::max<std::size_t>(opts.min_samples, 3))
    throw FitError("need at least " + std::to_string(std::max<std::size_t>(opts.min_samples, 3)) +
                   " samples, got " + std::to_string(samples.size()));
  double x_min = samples.front().osnr_db, x_max = x_min, mean = 0.0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.osnr_db) || !std::isfinite(s.q_db)) throw FitError("non-finite sample");
    x_min = std::min(x_min, s.osnr_db);
    x_max = std::max(x_max, s.osnr_db);
    mean += s.osnr_db;
  }
  mean /= static_cast<double>(samples.size());
  if (x_max == x_min) throw FitError("rank-deficient design: all OSNR values are equal");
  if (x_max - x_min < opts.min_spread_db)
    throw FitError("OSNR spread " + std::to_string(x_max - x_min) + " dB below the required " +
                   std::to_string(opts.min_spread_db) + " dB");
  const double scale = 0.5 * (x_max - x_min);

  // Normal equations in t = (x - mean) / scale.
  std::array<std::array<double, 4>, 3> m{};
  for (const auto& s : samples) {
    const double t = (s.osnr_db - mean) / scale;
    const std::array<double, 3> phi{1.0, t, t * t};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += phi[r] * phi[c];
      m[r][3] += phi[r] * s.q_db;
    }
  }
  const double pivot_tol = 1e-10 * static_cast<double>(samples.size());
  for (int col = 0; col < 3; ++col) {
    int best = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[best][col])) best = r;
    if (std::abs(m[best][col]) < pivot_tol)
      throw FitError("rank-deficient design: fewer than three distinct OSNR values");
    std::swap(m[col], m[best]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  const double p0 = m[0][3] / m[0][0];
  const double p1 = m[1][3] / m[1][1];
  const double p2 = m[2][3] / m[2][2];

  QuadraticFit fit;
  fit.a = p2 / (scale * scale);
  fit.b = p1 / scale - 2.0 * p2 * mean / (scale * scale);
  fit.c = p0 - p1 * mean / scale + p2 * mean * mean / (scale * scale);
  fit.osnr_min_db = x_min;
  fit.osnr_max_db = x_max;

  double ss = 0.0;
  for (const auto& s : samples) {
    const double t = (s.osnr_db - mean) / scale;
    const double r = p0 + p1 * t + p2 * t * t - s.q_db;
    ss += r * r;
  }
  fit.residual_rms_db = std::sqrt(ss / static_cast<double>(samples.size()));

  if (!fit.is_monotonic()) {
    const double zero = fit.a != 0.0 ? -fit.b / (2.0 * fit.a) : x_min;
    throw FitError("fit is not monotonic on [" + std::to_string(x_min) + ", " + std::to_string(x_max) +
                       "] dB; derivative vanishes at " + std::to_string(zero) + " dB",
                   zero);
  }
  return fit;
}

enum class Extrapolation { Reject, Clamp };

// Unique OSNR on the monotonic branch with fit.q_at(osnr) == q_db.
inline double invert_fit(const QuadraticFit& fit, double q_db, Extrapolation policy = Extrapolation::Reject) {
  if (std::isnan(q_db)) throw DomainError("Q is NaN");
  const double q_lo = fit.q_min_db();
  const double q_hi = fit.q_max_db();
  if (q_db < q_lo || q_db > q_hi) {
    const bool below = q_db < q_lo;
    if (policy == Extrapolation::Clamp) return below ? fit.osnr_min_db : fit.osnr_max_db;
    throw ExtrapolationError("Q " + std::to_string(q_db) + " dB outside the characterized interval [" +
                                 std::to_string(q_lo) + ", " + std::to_string(q_hi) + "] dB",
                             below ? q_lo : q_hi, below ? fit.osnr_min_db : fit.osnr_max_db);
  }
  // a*x^2 + b*x + cq = 0; the increasing branch is x = (-b + sqrt(D)) / (2a).
  const double cq = fit.c - q_db;
  const double disc = std::max(0.0, fit.b * fit.b - 4.0 * fit.a * cq);
  const double root = std::sqrt(disc);
  double x;
  if (fit.b > 0.0)
    x = -2.0 * cq / (fit.b + root);
  else
    x = (-fit.b + root) / (2.0 * fit.a);
  return std::clamp(x, fit.osnr_min_db, fit.osnr_max_db);
}

// Largest OSNR-domain deviation of the samples from the fit, i.e. how far an
// inversion of a noiseless reading can land from the true OSNR.
inline double osnr_residual_bound_db(const QuadraticFit& fit, const std::vector<QOverOsnrSample>& samples) {
  double worst = 0.0;
  for (const auto& s : samples)
    worst = std::max(worst, std::abs(fit.q_at(s.osnr_db) - s.q_db) / fit.slope_at(s.osnr_db));
  return worst;
}

struct B2BSweep {
  double osnr_min_db = 8.0;
  double osnr_max_db = 30.0;
  double step_db = 1.0;
};

// Back-to-back curve of a transponder with a flat implementation penalty,
// optionally with Gaussian Q noise.
inline std::vector<QOverOsnrSample> synthesize_b2b(const TransponderConfig& cfg, double impl_penalty_db,
                                                   const B2BSweep& sweep = {}, double q_noise_sigma_db = 0.0,
                                                   std::uint64_t seed = 0) {
  validate(cfg);
  if (!(sweep.step_db > 0.0) || !(sweep.osnr_max_db >= sweep.osnr_min_db))
    throw DomainError("invalid B2B sweep");
  GaussianStream noise(seed);
  std::vector<QOverOsnrSample> out;
  const auto n = static_cast<int>(std::floor((sweep.osnr_max_db - sweep.osnr_min_db) / sweep.step_db + 1e-9));
  for (int i = 0; i <= n; ++i) {
    const double x = sweep.osnr_min_db + i * sweep.step_db;
    double q = theoretical_q_db(cfg.bits_per_symbol, normalize_to_gsnr(x, cfg.symbol_rate_gbd) - impl_penalty_db);
    if (q_noise_sigma_db > 0.0) q += noise.next(0.0, q_noise_sigma_db);
    out.push_back({x, q});
  }
  return out;
}

// Q read out from a receiver operating at `true_gsnr_db`.
inline double rx_q_readout(const TransponderConfig& cfg, double true_gsnr_db, double impl_penalty_db,
                           double q_noise_sigma_db, std::uint64_t seed) {
  if (!(q_noise_sigma_db >= 0.0)) throw DomainError("Q noise sigma must be non-negative");
  const double q = theoretical_q_db(cfg.bits_per_symbol, true_gsnr_db - impl_penalty_db);
  if (q_noise_sigma_db == 0.0) return q;
  GaussianStream noise(seed);
  return q + noise.next(0.0, q_noise_sigma_db);
}

}  // namespace chprobe
