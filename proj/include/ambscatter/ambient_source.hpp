#pragma once

// Statistical stand-ins for the ambient illuminators: a stationary
// band-limited circular Gaussian process (TV / 4G downlink, OFDM-like
// Rayleigh envelope) and the same process gated by a periodic TDD mask (5G).

#include <cstdint>
#include <string>

#include "ambscatter/iq_buffer.hpp"

namespace ambscatter {

enum class SourceKind { tv, four_g, five_g_tdd };

const char* to_string(SourceKind k);
SourceKind source_kind_from_string(const std::string& s);

struct SourceProfile {
  SourceKind kind = SourceKind::tv;
  double mean_power = 1.0;    // power while the source is on
  double tdd_period = 1e-3;   // s, five_g_tdd only
  double duty_cycle = 0.7;    // on fraction, five_g_tdd only
  double burst_jitter = 0.0;  // relative per-period spread of the on duration
  std::uint64_t rng_seed = 1;

  static SourceProfile tv(std::uint64_t seed = 1);
  static SourceProfile four_g(std::uint64_t seed = 1);
  static SourceProfile five_g(std::uint64_t seed = 1);

  /// Long-run average power: mean_power, times duty_cycle when gated.
  double average_power() const;

  /// Throws std::invalid_argument on a violated field invariant.
  void check() const;
};

/// Fraction of the process bandwidth relative to Nyquist.
inline constexpr double kSourceBandwidthFraction = 0.8;

/// Deterministic in (profile, duration, sample_rate). Throws
/// std::invalid_argument for non-positive duration/rate or a TDD period
/// shorter than 10 samples.
IqBuffer generate(const SourceProfile& profile, double duration, double sample_rate);

/// On/off TDD mask the gated source applies (1 = on), exposed for tests.
std::vector<std::uint8_t> tdd_mask(const SourceProfile& profile, std::size_t n_samples,
                                   double sample_rate);

}  // namespace ambscatter
