#pragma once

// Monte-Carlo link evaluation: ambient source -> backscatter channel ->
// energy detector, scored against the transmitted image.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ambscatter/ambient_source.hpp"
#include "ambscatter/channel_sim.hpp"
#include "ambscatter/energy_detector.hpp"
#include "ambscatter/frame_codec.hpp"

namespace ambscatter {

struct TagConfig {
  PixelImage image;
  double ts = 2.7e-3;  // s per FM0 half-symbol
  Bits sync{kDefaultSync.begin(), kDefaultSync.end()};
  std::size_t repetitions = 2;
  std::uint8_t initial_level = 0;
};

struct LinkConfig {
  SourceProfile source;
  ChannelParams channel;
  DetectorConfig detector;
  TagConfig tag;
  /// Quiet time before the first frame, on top of a seeded uniform jitter of
  /// up to two symbol periods. Negative means "use detector.ta".
  double lead_time = -1.0;

  /// TV source and reader, contrast 1.2, noiseless.
  static LinkConfig tv_4g();
  /// 5G reader, TDD source (1 ms, duty 0.7), contrast 1.2, noiseless.
  static LinkConfig five_g();

  /// Throws std::invalid_argument on structural errors (not on parameter
  /// constraint violations, which are legitimate experiments).
  void check() const;
};

/// Default tag payload used by the examples and tests.
PixelImage default_image();

/// 64-bit mixer used for every derived seed.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t point, std::uint64_t trial);

struct Simulation {
  IqBuffer iq;
  SwitchWaveform tag;
  std::vector<double> frame_starts;  // s, first payload half-symbol of each repetition
  std::uint64_t seed = 0;
  std::uint64_t source_seed = 0;
  std::uint64_t noise_seed = 0;
};

/// One transmission of `tag.repetitions` frames. Deterministic per seed.
Simulation simulate_link(const LinkConfig& link, std::uint64_t seed);

struct TrialOutcome {
  bool detected = false;
  std::size_t bit_errors = 0;    // over the payload of the first decoded frame
  std::size_t pixel_errors = 0;  // as bit_errors; every pixel when missed
  std::size_t sync_matches = 0;
  std::size_t frames = 0;

  friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

TrialOutcome run_trial(const LinkConfig& link, std::uint64_t seed);

enum class SweepAxis { snr_db, contrast_db, doppler_hz, ts };

const char* to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

/// Copy of `base` with the axis set to `value`. snr_db sets the noise power
/// against the two-state power gap; contrast_db rescales the cascade gain;
/// ts (seconds) moves both the tag and the reader.
LinkConfig apply_axis(const LinkConfig& base, SweepAxis axis, double value);

struct SweepSpec {
  SweepAxis axis = SweepAxis::snr_db;
  std::vector<double> grid;
  std::size_t trials_per_point = 1;
  LinkConfig base;
  std::uint64_t rng_seed = 1;
  unsigned threads = 0;  // 0 = hardware concurrency

  void check() const;
};

struct SweepPoint {
  double value = 0.0;
  std::size_t trials = 0;
  std::size_t detected = 0;
  std::size_t missed = 0;
  std::size_t bit_errors = 0;
  std::size_t bits_compared = 0;  // payload bits of detected trials
  std::size_t pixel_errors = 0;
  std::size_t pixels_total = 0;   // payload bits of all trials
  std::size_t sync_matches = 0;   // summed over detected trials
  std::size_t sync_bits = 0;      // sync length times detected trials
  double noise_power = 0.0;
  double contrast = 1.0;

  double bit_error_rate() const;
  double pixel_error_rate() const;
  double frame_detection_rate() const;
  double mean_score() const;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepPoint> points;

  void write_csv(std::ostream& os) const;
  std::string to_json() const;
};

SweepResult run_sweep(const SweepSpec& spec);

struct BenchResult {
  std::size_t samples = 0;
  double seconds = 0.0;
  double samples_per_second = 0.0;
  std::size_t frames = 0;
};

/// Times decode() over a pre-generated buffer of `duration` seconds at the
/// link's F1. Throws if duration < 1 s.
BenchResult bench_throughput(double duration, const LinkConfig& link = LinkConfig::tv_4g());

}  // namespace ambscatter
