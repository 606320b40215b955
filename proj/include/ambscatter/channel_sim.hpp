#pragma once

// Two-state backscatter channel: direct path plus a cascade path whose gain
// follows the tag switch state, receiver AWGN and an optional Doppler
// rotation on the backscatter path. Flat, zero excess delay.

#include <complex>
#include <cstdint>

#include "ambscatter/frame_codec.hpp"
#include "ambscatter/iq_buffer.hpp"

namespace ambscatter {

using Complex = std::complex<double>;

struct ChannelParams {
  Complex h_direct{1.0, 0.0};
  Complex g_cascade{0.1, 0.0};
  Complex refl_connected{0.0, 0.0};     // short circuit
  Complex refl_disconnected{0.5, 0.0};  // open circuit
  double noise_power = 0.0;
  double doppler_hz = 0.0;

  Complex reflection(SwitchState s) const {
    return s == SwitchState::connected ? refl_connected : refl_disconnected;
  }

  /// Received amplitude gain while the tag sits in state s (no Doppler).
  Complex state_gain(SwitchState s) const { return h_direct + g_cascade * reflection(s); }

  /// Throws std::invalid_argument on a violated field invariant.
  void check() const;
};

struct SwitchWaveform {
  Fm0Levels levels;
  double symbol_period = 0.0;  // Ts, seconds per level
  double start_offset = 0.0;   // seconds into the buffer

  double duration() const { return static_cast<double>(levels.levels.size()) * symbol_period; }
};

struct Contrast {
  double ratio = 1.0;  // P(disconnected) / P(connected)
  bool infinite = false;
};

Contrast contrast(const ChannelParams& ch);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

/// |P(disconnected) - P(connected)| for a source of the given power.
double state_power_gap(const ChannelParams& ch, double source_power);

/// Noise power that puts the two-state power gap `snr_db` above the noise.
double noise_power_for_snr(const ChannelParams& ch, double source_power, double snr_db);

/// Rescales g_cascade (keeping its phase) to the smallest positive magnitude
/// giving the requested linear contrast. Throws if no such gain exists.
ChannelParams with_contrast(ChannelParams ch, double contrast_ratio);

/// Per-sample tag state at the source rate; samples outside the waveform hold
/// the resting (connected) state. Throws if the waveform overruns the buffer.
std::vector<std::uint8_t> switch_levels_per_sample(const SwitchWaveform& tag, std::size_t n_samples,
                                                   double sample_rate);

IqBuffer apply(const IqBuffer& source, const SwitchWaveform& tag, const ChannelParams& ch,
               std::uint64_t rng_seed);

}  // namespace ambscatter
