#pragma once

// Non-coherent reader: |x|^2 -> low-pass (F3) -> decimate to T2 -> high-pass
// (F4) -> moving-average threshold (Ta) -> binary -> sample every Ts ->
// FM0 demod -> sync correlation -> pixel image.
//
// Every stage exists both as a streaming processor (used by Decoder, O(1)
// memory in the input length) and as a batch function built on the same
// processor.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ambscatter/ambient_source.hpp"
#include "ambscatter/filters.hpp"
#include "ambscatter/frame_codec.hpp"
#include "ambscatter/iq_buffer.hpp"

namespace ambscatter {

struct DetectorConfig {
  double t1 = 1e-6;    // s, input sample period (F1 = 1/t1)
  double t2 = 0.5e-3;  // s, decimated sample period (F2 = 1/t2)
  double f3 = 500.0;   // Hz, low-pass cutoff
  double f4 = 50.0;    // Hz, high-pass cutoff
  double ta = 50e-3;   // s, moving-average threshold window
  double ts = 2.7e-3;  // s, tag half-symbol period (Fs = 1/ts, Fb = 1/(2 ts))
  Bits sync{kDefaultSync.begin(), kDefaultSync.end()};
  std::size_t frame_bits = kFrameBits;
  std::size_t rows = kImageRows;
  std::size_t cols = kImageCols;

  bool causal_threshold = false;
  double min_sync_score = 7.0 / 8.0;  // normalized sync correlation
  double max_violation_fraction = 0.2;  // FM0 boundary violations per frame

  /// Reader parameters for TV / 4G illumination.
  static DetectorConfig tv_4g();
  /// 5G illumination; T1, T2 and Ta as for TV / 4G.
  static DetectorConfig five_g();

  double f1() const { return 1.0 / t1; }
  double f2() const { return 1.0 / t2; }
  double fs() const { return 1.0 / ts; }
  double fb() const { return 1.0 / (2.0 * ts); }
  std::size_t payload_bits() const { return rows * cols; }
};

enum class Constraint {
  positive_parameters,
  lowpass_above_symbol_rate,      // F3 > Fs
  highpass_below_bit_rate,        // F4 < Fb
  input_rate_above_symbol_rate,   // F1 > Fs
  decimated_rate_above_symbol_rate,  // F2 > Fs
  threshold_window_spans_symbols,    // Ta >= 4 Ts
  symbol_longer_than_tdd_frame,      // Ts > T_5G
  frame_layout,                      // frame_bits = rows*cols + sync bits
};

const char* to_string(Constraint c);

struct Violation {
  Constraint constraint;
  std::string message;
};

/// Every violated parameter constraint. The TDD rule is checked only when a
/// gated source profile is given.
std::vector<Violation> validate(const DetectorConfig& cfg,
                                const std::optional<SourceProfile>& profile = std::nullopt);

/// Thrown by decode() when the configuration fails validation.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& what, std::vector<Violation> v)
      : std::invalid_argument(what), violations(std::move(v)) {}
  std::vector<Violation> violations;
};

// ---------------------------------------------------------------------------
// Streaming stages

/// |x|^2, fourth-order low-pass at F3, nearest-sample pick every T2.
class PowerLowpassDecimator {
 public:
  PowerLowpassDecimator(double input_rate, double f3, double t2);

  /// Appends decimated low-pass outputs (and the raw power at each pick when
  /// `raw` is non-null).
  void push(std::span<const Sample> iq, std::vector<double>& out, std::vector<double>* raw = nullptr);
  void push_power(std::span<const float> power, std::vector<double>& out,
                  std::vector<double>* raw = nullptr);

 private:
  void step(double p, std::vector<double>& out, std::vector<double>* raw);

  ButterworthLowpass lpf_;
  double ratio_;  // input samples per output sample
  std::uint64_t index_ = 0;
  std::uint64_t picked_ = 0;
  std::uint64_t next_pick_ = 0;
};

/// Compares each sample against the moving average of a window of Ta around
/// it. Centered windows shrink symmetrically at the stream edges; the causal
/// variant uses the trailing window and has no lookahead.
class MovingAverageSlicer {
 public:
  MovingAverageSlicer(std::size_t window, bool causal);

  void push(double x, std::vector<double>& threshold, std::vector<std::uint8_t>& bits);
  void finish(std::vector<double>& threshold, std::vector<std::uint8_t>& bits);

  std::size_t half_window() const { return half_; }

 private:
  void emit(std::size_t half, std::vector<double>& threshold, std::vector<std::uint8_t>& bits);

  std::size_t half_;
  bool causal_;
  std::deque<double> buf_;  // holds indices [base_, received_)
  std::size_t base_ = 0;
  std::size_t received_ = 0;
  std::size_t next_out_ = 0;
};

/// Window length in samples for a threshold window of `ta` at rate 1/t2.
std::size_t threshold_window_samples(double ta, double t2);

/// One level stream per candidate timing offset o*t2, o in [0, 2 ts / t2):
/// level k is the binary sample nearest to o + k*ts/t2.
class SymbolSampler {
 public:
  SymbolSampler(double t2, double ts);

  std::size_t offsets() const { return next_.size(); }
  double stride() const { return stride_; }

  /// Feeds binary sample `bit`; calls sink(offset, level) for every level
  /// that becomes available.
  template <class Sink>
  void push(std::uint8_t bit, Sink&& sink) {
    const std::uint64_t i = received_++;
    for (std::size_t o = 0; o < next_.size(); ++o) {
      while (index_of(o, next_[o]) == i) {
        sink(o, bit);
        ++next_[o];
      }
    }
  }

  std::uint64_t index_of(std::size_t offset, std::uint64_t k) const;

 private:
  double stride_;
  std::vector<std::uint64_t> next_;
  std::uint64_t received_ = 0;
};

struct DecodedFrame {
  PixelImage image;
  Bits bits;                     // sync followed by payload
  std::size_t sync_matches = 0;  // out of sync.size()
  double score = 0.0;            // sync_matches / sync.size()
  double timing_offset = 0.0;    // s, sampling instant of the first payload half-symbol
  double candidate_offset = 0.0; // s, timing offset of the winning level stream
  std::size_t fm0_violations = 0;
};

struct StageTraces {
  double sample_period = 0.0;  // t2
  std::vector<double> power;   // raw |x|^2 at each decimation pick
  std::vector<double> lowpass;
  std::vector<double> highpass;
  std::vector<double> threshold;
  std::vector<std::uint8_t> binary;

  void write_csv(std::ostream& os) const;
};

struct DecodeReport {
  std::vector<DecodedFrame> frames;
  Bits symbol_stream;  // bits of every emitted frame, in order
  std::size_t fm0_violations = 0;
  Bits sync;
  std::size_t candidates = 0;  // timing offsets searched
  bool too_short = false;      // stream shorter than one frame
  std::optional<StageTraces> traces;

  bool sync_found() const { return !frames.empty(); }
  std::string status() const;
};

/// Frame acquisition over the per-offset level streams. Sync start times are
/// scanned one frame period at a time. Once a window holds an acceptable
/// candidate (min_sync_score; at most max_violation_fraction FM0 violations
/// over the frame and over the payload before the sync), every candidate within one frame period of the earliest
/// one competes: lowest 2 * missed sync bits + FM0 violations over the frame
/// and the payload before the sync, then most matches, then the median tie.
class FrameSearcher {
 public:
  FrameSearcher(const DetectorConfig& cfg, double stride, std::size_t offsets);

  void push_level(std::size_t offset, std::uint8_t level);
  void finish();

  const std::vector<DecodedFrame>& frames() const { return frames_; }
  std::vector<DecodedFrame> take_frames() { return std::move(frames_); }

 private:
  struct Candidate {
    std::size_t offset;
    std::uint64_t lag;  // bit index of the sync start in the offset's stream
    double time;        // in decimated samples
    std::size_t matches;
    std::size_t violations;          // over the frame starting at the sync
    std::size_t context_violations;  // over the payload preceding the sync
  };

  void process(bool final);
  bool level_available(std::size_t o, std::uint64_t k) const;
  std::uint8_t level(std::size_t o, std::uint64_t k) const;
  Candidate evaluate(std::size_t o, std::uint64_t j) const;
  bool scan(double start, double end, bool final, std::vector<Candidate>& passing, bool& any_complete) const;
  void trim();

  DetectorConfig cfg_;
  double stride_;
  std::size_t frame_levels_;
  std::size_t min_matches_;
  std::size_t max_violations_;
  std::size_t max_context_violations_;
  std::vector<std::deque<std::uint8_t>> levels_;
  std::vector<std::uint64_t> base_;
  double cursor_ = 0.0;
  std::optional<double> anchor_;
  bool done_ = false;
  std::vector<DecodedFrame> frames_;
};

// ---------------------------------------------------------------------------
// Batch stages

std::vector<float> power_detect(std::span<const Sample> iq);

/// Throws std::invalid_argument if f3 is not below the input Nyquist rate
/// or t2 is shorter than one input sample.
std::vector<double> lpf_downsample(std::span<const float> power, double input_rate, double f3,
                                   double t2);

/// Throws std::invalid_argument if f4 is not below Nyquist.
std::vector<double> hpf(std::span<const double> stream, double stream_rate, double f4);

std::vector<std::uint8_t> threshold_binarize(std::span<const double> stream, double stream_rate,
                                             double ta, bool causal = false);

struct SymbolCandidates {
  double t2 = 0.0;
  double stride = 0.0;  // ts / t2
  std::vector<Bits> levels;  // levels[o]: stream for timing offset o*t2
  bool too_short = false;
};

/// Requires ts > t2. An input shorter than one frame (frame_levels * ts)
/// yields no candidates and sets too_short.
SymbolCandidates recover_symbols(std::span<const std::uint8_t> binary, double t2, double ts,
                                 std::size_t frame_levels = kFrameLevels);

DecodeReport sync_search(const SymbolCandidates& candidates, const DetectorConfig& cfg);

// ---------------------------------------------------------------------------
// Full chain

struct DecodeOptions {
  bool keep_traces = false;
  bool allow_violations = false;  // decode even if validate() complains
};

class Decoder {
 public:
  Decoder(const DetectorConfig& cfg, double input_rate, DecodeOptions opts = {});

  void push(std::span<const Sample> iq);
  DecodeReport finish();

 private:
  void feed_decimated();
  void feed_bits();

  DetectorConfig cfg_;
  DecodeOptions opts_;
  PowerLowpassDecimator front_;
  FirstOrderHighpass hpf_;
  bool hpf_primed_ = false;
  MovingAverageSlicer slicer_;
  SymbolSampler sampler_;
  FrameSearcher searcher_;
  std::uint64_t decimated_ = 0;

  std::vector<double> lowpass_scratch_, raw_scratch_, threshold_scratch_;
  std::vector<std::uint8_t> bit_scratch_;
  StageTraces traces_;
};

DecodeReport decode(const IqBuffer& iq, const DetectorConfig& cfg, DecodeOptions opts = {});

}  // namespace ambscatter
