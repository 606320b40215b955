#include "ambscatter/energy_detector.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace ambscatter {

namespace {

constexpr double kRelTol = 1e-9;

inline float power_of(Sample s) { return s.real() * s.real() + s.imag() * s.imag(); }

std::string hz(double v) {
  std::ostringstream os;
  os << v << " Hz";
  return os.str();
}

std::string ms(double v) {
  std::ostringstream os;
  os << v * 1e3 << " ms";
  return os.str();
}

}  // namespace

DetectorConfig DetectorConfig::tv_4g() { return DetectorConfig{}; }

DetectorConfig DetectorConfig::five_g() {
  DetectorConfig c;
  c.ts = 10.8e-3;
  c.f3 = 100.0;
  c.f4 = 1.0;
  return c;
}

const char* to_string(Constraint c) {
  switch (c) {
    case Constraint::positive_parameters: return "positive_parameters";
    case Constraint::lowpass_above_symbol_rate: return "f3_above_fs";
    case Constraint::highpass_below_bit_rate: return "f4_below_fb";
    case Constraint::input_rate_above_symbol_rate: return "f1_above_fs";
    case Constraint::decimated_rate_above_symbol_rate: return "f2_above_fs";
    case Constraint::threshold_window_spans_symbols: return "ta_at_least_4ts";
    case Constraint::symbol_longer_than_tdd_frame: return "ts_above_t5g";
    case Constraint::frame_layout: return "frame_layout";
  }
  return "?";
}

std::vector<Violation> validate(const DetectorConfig& cfg, const std::optional<SourceProfile>& profile) {
  std::vector<Violation> v;
  if (!(cfg.t1 > 0 && cfg.t2 > 0 && cfg.f3 > 0 && cfg.f4 > 0 && cfg.ta > 0 && cfg.ts > 0)) {
    v.push_back({Constraint::positive_parameters, "t1, t2, f3, f4, ta and ts must all be positive"});
    return v;
  }
  if (!(cfg.f3 > cfg.fs()))
    v.push_back({Constraint::lowpass_above_symbol_rate,
                 "F3 = " + hz(cfg.f3) + " must exceed Fs = " + hz(cfg.fs())});
  if (!(cfg.f4 < cfg.fb()))
    v.push_back({Constraint::highpass_below_bit_rate,
                 "F4 = " + hz(cfg.f4) + " must stay below Fb = " + hz(cfg.fb())});
  if (!(cfg.f1() > cfg.fs()))
    v.push_back({Constraint::input_rate_above_symbol_rate,
                 "F1 = " + hz(cfg.f1()) + " must exceed Fs = " + hz(cfg.fs())});
  if (!(cfg.f2() > cfg.fs()))
    v.push_back({Constraint::decimated_rate_above_symbol_rate,
                 "F2 = " + hz(cfg.f2()) + " must exceed Fs = " + hz(cfg.fs())});
  if (cfg.ta < 4.0 * cfg.ts * (1.0 - kRelTol))
    v.push_back({Constraint::threshold_window_spans_symbols,
                 "Ta = " + ms(cfg.ta) + " must be at least 4 Ts = " + ms(4.0 * cfg.ts)});
  if (profile && profile->kind == SourceKind::five_g_tdd && !(cfg.ts > profile->tdd_period))
    v.push_back({Constraint::symbol_longer_than_tdd_frame,
                 "Ts = " + ms(cfg.ts) + " must exceed the TDD frame T_5G = " + ms(profile->tdd_period)});
  const bool binary_sync =
      std::all_of(cfg.sync.begin(), cfg.sync.end(), [](std::uint8_t b) { return b <= 1; });
  if (cfg.sync.empty() || !binary_sync || cfg.rows == 0 || cfg.cols == 0 ||
      cfg.frame_bits != cfg.payload_bits() + cfg.sync.size())
    v.push_back({Constraint::frame_layout,
                 "frame_bits = " + std::to_string(cfg.frame_bits) + " must equal rows*cols + sync bits = " +
                     std::to_string(cfg.payload_bits() + cfg.sync.size()) + " with a nonempty binary sync"});
  return v;
}

// ---------------------------------------------------------------------------

PowerLowpassDecimator::PowerLowpassDecimator(double input_rate, double f3, double t2)
    : lpf_(f3, input_rate), ratio_(t2 * input_rate) {
  if (!(ratio_ >= 1.0 - kRelTol))
    throw std::invalid_argument("decimation period t2 is shorter than one input sample");
}

void PowerLowpassDecimator::step(double p, std::vector<double>& out, std::vector<double>* raw) {
  if (index_ == 0) lpf_.prime(p);
  const double y = lpf_.process(p);
  if (index_ == next_pick_) {
    out.push_back(y);
    if (raw) raw->push_back(p);
    ++picked_;
    next_pick_ = static_cast<std::uint64_t>(std::llround(static_cast<double>(picked_) * ratio_));
  }
  ++index_;
}

void PowerLowpassDecimator::push(std::span<const Sample> iq, std::vector<double>& out,
                                 std::vector<double>* raw) {
  for (auto s : iq) step(power_of(s), out, raw);
}

void PowerLowpassDecimator::push_power(std::span<const float> power, std::vector<double>& out,
                                       std::vector<double>* raw) {
  for (auto p : power) step(p, out, raw);
}

// ---------------------------------------------------------------------------

std::size_t threshold_window_samples(double ta, double t2) {
  const auto w = std::llround(ta / t2);
  if (w < 4) {
    throw std::invalid_argument("threshold window Ta covers " + std::to_string(w) +
                                " samples at F2, need at least 4");
  }
  return static_cast<std::size_t>(w);
}

MovingAverageSlicer::MovingAverageSlicer(std::size_t window, bool causal)
    : half_(window / 2), causal_(causal) {
  if (window < 4) throw std::invalid_argument("moving-average window must span at least 4 samples");
}

void MovingAverageSlicer::emit(std::size_t half, std::vector<double>& threshold,
                               std::vector<std::uint8_t>& bits) {
  const std::size_t n = next_out_;
  const std::size_t lo = n - half;
  const std::size_t hi = causal_ ? n : n + half;
  const double x = buf_[n - base_];
  double sum = 0.0, above = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    sum += buf_[i - base_];
    above += x - buf_[i - base_];  // exactly 0 on a flat window
  }
  threshold.push_back(sum / static_cast<double>(hi - lo + 1));
  bits.push_back(above > 0.0 ? 1 : 0);
  ++next_out_;
  const std::size_t keep_from = causal_ ? (next_out_ > 2 * half_ ? next_out_ - 2 * half_ : 0)
                                        : (next_out_ > half_ ? next_out_ - half_ : 0);
  while (base_ < keep_from) {
    buf_.pop_front();
    ++base_;
  }
}

void MovingAverageSlicer::push(double x, std::vector<double>& threshold, std::vector<std::uint8_t>& bits) {
  buf_.push_back(x);
  ++received_;
  if (causal_) {
    emit(std::min(next_out_, 2 * half_), threshold, bits);
    return;
  }
  while (next_out_ < received_ && next_out_ + std::min(next_out_, half_) < received_)
    emit(std::min(next_out_, half_), threshold, bits);
}

void MovingAverageSlicer::finish(std::vector<double>& threshold, std::vector<std::uint8_t>& bits) {
  if (causal_) return;
  while (next_out_ < received_) {
    const std::size_t to_end = received_ - 1 - next_out_;
    emit(std::min({next_out_, half_, to_end}), threshold, bits);
  }
}

// ---------------------------------------------------------------------------

SymbolSampler::SymbolSampler(double t2, double ts) : stride_(ts / t2) {
  if (!(t2 > 0.0) || !(ts > t2)) throw std::invalid_argument("symbol recovery needs ts > t2 > 0");
  // Offsets on the t2 grid covering [0, 2 ts); rounding guards 2*stride
  // landing a hair above an integer.
  const double span = std::round(2.0 * stride_ * 1e9) / 1e9;
  next_.assign(static_cast<std::size_t>(std::ceil(span)), 0);
}

std::uint64_t SymbolSampler::index_of(std::size_t offset, std::uint64_t k) const {
  return static_cast<std::uint64_t>(
      std::llround(static_cast<double>(offset) + static_cast<double>(k) * stride_));
}

// ---------------------------------------------------------------------------

FrameSearcher::FrameSearcher(const DetectorConfig& cfg, double stride, std::size_t offsets)
    : cfg_(cfg),
      stride_(stride),
      frame_levels_(2 * cfg.frame_bits),
      min_matches_(static_cast<std::size_t>(
          std::ceil(cfg.min_sync_score * static_cast<double>(cfg.sync.size()) - kRelTol))),
      max_violations_(static_cast<std::size_t>(
          std::floor(cfg.max_violation_fraction * static_cast<double>(cfg.frame_bits - 1) + kRelTol))),
      max_context_violations_(static_cast<std::size_t>(
          std::floor(cfg.max_violation_fraction * static_cast<double>(cfg.payload_bits()) + kRelTol))),
      levels_(offsets),
      base_(offsets, 0) {
  if (cfg.sync.empty() || cfg.frame_bits != cfg.payload_bits() + cfg.sync.size())
    throw std::invalid_argument("frame search: inconsistent frame layout");
  if (offsets == 0 || !(stride > 1.0)) throw std::invalid_argument("frame search: bad symbol grid");
}

bool FrameSearcher::level_available(std::size_t o, std::uint64_t k) const {
  return k < base_[o] + levels_[o].size();
}

std::uint8_t FrameSearcher::level(std::size_t o, std::uint64_t k) const {
  return levels_[o][static_cast<std::size_t>(k - base_[o])];
}

void FrameSearcher::push_level(std::size_t offset, std::uint8_t lvl) {
  levels_[offset].push_back(lvl);
  process(false);
}

void FrameSearcher::finish() { process(true); }

FrameSearcher::Candidate FrameSearcher::evaluate(std::size_t o, std::uint64_t j) const {
  const std::uint64_t k0 = 2 * j;
  Candidate c{o, j, static_cast<double>(o) + static_cast<double>(k0) * stride_, 0, 0, 0};
  for (std::size_t i = 0; i < cfg_.sync.size(); ++i) {
    const std::uint8_t bit = level(o, k0 + 2 * i) == level(o, k0 + 2 * i + 1) ? 1 : 0;
    c.matches += bit == cfg_.sync[i];
  }
  for (std::size_t i = 1; i < cfg_.frame_bits; ++i)
    c.violations += level(o, k0 + 2 * i - 1) == level(o, k0 + 2 * i);
  // boundaries inside the payload that precedes the sync; missing history counts against
  const std::size_t back = cfg_.payload_bits();
  for (std::size_t i = 0; i < back; ++i) {
    const std::uint64_t b = 2 * i + 2;  // boundary between levels k0-b-1 and k0-b
    if (k0 < b + 1 || k0 - b - 1 < base_[o]) {
      ++c.context_violations;
    } else {
      c.context_violations += level(o, k0 - b - 1) == level(o, k0 - b);
    }
  }
  return c;
}

bool FrameSearcher::scan(double start, double end, bool final, std::vector<Candidate>& passing,
                         bool& any_complete) const {
  const double bit_span = 2.0 * stride_;
  const std::size_t offsets = levels_.size();
  std::vector<std::uint64_t> lo(offsets), hi(offsets);
  for (std::size_t o = 0; o < offsets; ++o) {
    const double od = static_cast<double>(o);
    lo[o] = start <= od ? 0 : static_cast<std::uint64_t>(std::ceil((start - od) / bit_span));
    hi[o] = end <= od ? 0 : static_cast<std::uint64_t>(std::ceil((end - od) / bit_span));
    if (!final && hi[o] > lo[o] && !level_available(o, 2 * (hi[o] - 1) + frame_levels_ - 1)) return false;
  }
  passing.clear();
  any_complete = false;
  for (std::size_t o = 0; o < offsets; ++o) {
    for (std::uint64_t j = lo[o]; j < hi[o]; ++j) {
      if (!level_available(o, 2 * j + frame_levels_ - 1)) break;
      any_complete = true;
      auto c = evaluate(o, j);
      if (c.matches >= min_matches_ && c.violations <= max_violations_ &&
          c.context_violations <= max_context_violations_)
        passing.push_back(c);
    }
  }
  return true;
}

void FrameSearcher::process(bool final) {
  const double window = static_cast<double>(frame_levels_) * stride_;
  std::vector<Candidate> passing;
  bool any_complete = false;

  while (!done_) {
    if (!anchor_) {
      if (!scan(cursor_, cursor_ + window, final, passing, any_complete)) return;
      if (!any_complete) {
        if (final) done_ = true;
        return;
      }
      if (passing.empty()) {
        cursor_ += window;
        trim();
        continue;
      }
      double first = passing.front().time;
      for (const auto& c : passing) first = std::min(first, c.time);
      anchor_ = first;
    }

    // One frame period from the first acceptable candidate holds exactly one
    // true sync when a transmission is present.
    if (!scan(*anchor_, *anchor_ + window, final, passing, any_complete)) return;
    anchor_.reset();
    if (passing.empty()) {  // only possible at the end of the stream
      done_ = true;
      return;
    }
    const std::size_t n_sync = cfg_.sync.size();
    auto better = [n_sync](const Candidate& a, const Candidate& b) {
      // a missed sync bit weighs as two violations
      const auto ca = 2 * (n_sync - a.matches) + a.violations + a.context_violations;
      const auto cb = 2 * (n_sync - b.matches) + b.violations + b.context_violations;
      if (ca != cb) return ca < cb;
      return a.matches > b.matches;
    };
    std::sort(passing.begin(), passing.end(), [&](const Candidate& a, const Candidate& b) {
      if (better(a, b)) return true;
      if (better(b, a)) return false;
      return a.time < b.time;
    });
    std::size_t ties = 1;
    while (ties < passing.size() && !better(passing[0], passing[ties])) ++ties;
    const Candidate& best = passing[(ties - 1) / 2];

    DecodedFrame f;
    const std::uint64_t k0 = 2 * best.lag;
    f.bits.reserve(cfg_.frame_bits);
    for (std::size_t i = 0; i < cfg_.frame_bits; ++i)
      f.bits.push_back(level(best.offset, k0 + 2 * i) == level(best.offset, k0 + 2 * i + 1) ? 1 : 0);
    const std::span<const std::uint8_t> payload(f.bits.data() + cfg_.sync.size(), cfg_.payload_bits());
    f.image = PixelImage::from_bits(payload, cfg_.rows, cfg_.cols);
    f.sync_matches = best.matches;
    f.score = static_cast<double>(best.matches) / static_cast<double>(cfg_.sync.size());
    f.candidate_offset = static_cast<double>(best.offset) * cfg_.t2;
    f.timing_offset = (best.time + static_cast<double>(2 * cfg_.sync.size()) * stride_) * cfg_.t2;
    f.fm0_violations = best.violations;
    frames_.push_back(std::move(f));

    // next search opens one half-symbol ahead of the expected next sync
    cursor_ = best.time + window - stride_;
    trim();
  }
}

void FrameSearcher::trim() {
  const double bit_span = 2.0 * stride_;
  const std::uint64_t history = 2 * cfg_.payload_bits();
  for (std::size_t o = 0; o < levels_.size(); ++o) {
    const double od = static_cast<double>(o);
    const std::uint64_t lo =
        cursor_ <= od ? 0 : static_cast<std::uint64_t>(std::ceil((cursor_ - od) / bit_span));
    while (base_[o] + history < 2 * lo && !levels_[o].empty()) {
      levels_[o].pop_front();
      ++base_[o];
    }
  }
}

// ---------------------------------------------------------------------------

void StageTraces::write_csv(std::ostream& os) const {
  os << "time_s,power,lowpass,highpass,threshold,binary\n";
  const std::size_t n = std::min({power.size(), lowpass.size(), highpass.size(), threshold.size(),
                                  binary.size()});
  for (std::size_t i = 0; i < n; ++i) {
    os << static_cast<double>(i) * sample_period << ',' << power[i] << ',' << lowpass[i] << ','
       << highpass[i] << ',' << threshold[i] << ',' << int(binary[i]) << '\n';
  }
}

std::string DecodeReport::status() const {
  if (!frames.empty()) return "decoded " + std::to_string(frames.size()) + " frame(s)";
  if (too_short) return "buffer shorter than one frame";
  return "no sync found";
}

// ---------------------------------------------------------------------------

std::vector<float> power_detect(std::span<const Sample> iq) {
  std::vector<float> out(iq.size());
  std::transform(iq.begin(), iq.end(), out.begin(), power_of);
  return out;
}

std::vector<double> lpf_downsample(std::span<const float> power, double input_rate, double f3,
                                   double t2) {
  PowerLowpassDecimator stage(input_rate, f3, t2);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(static_cast<double>(power.size()) / (t2 * input_rate)) + 2);
  stage.push_power(power, out);
  return out;
}

std::vector<double> hpf(std::span<const double> stream, double stream_rate, double f4) {
  FirstOrderHighpass f(f4, stream_rate);
  std::vector<double> out;
  out.reserve(stream.size());
  if (!stream.empty()) f.prime(stream.front());
  for (double x : stream) out.push_back(f.process(x));
  return out;
}

std::vector<std::uint8_t> threshold_binarize(std::span<const double> stream, double stream_rate,
                                             double ta, bool causal) {
  MovingAverageSlicer slicer(threshold_window_samples(ta, 1.0 / stream_rate), causal);
  std::vector<double> thr;
  std::vector<std::uint8_t> bits;
  thr.reserve(stream.size());
  bits.reserve(stream.size());
  for (double x : stream) slicer.push(x, thr, bits);
  slicer.finish(thr, bits);
  return bits;
}

SymbolCandidates recover_symbols(std::span<const std::uint8_t> binary, double t2, double ts,
                                 std::size_t frame_levels) {
  SymbolSampler sampler(t2, ts);
  SymbolCandidates out;
  out.t2 = t2;
  out.stride = sampler.stride();
  if (static_cast<double>(binary.size()) * t2 < static_cast<double>(frame_levels) * ts) {
    out.too_short = true;
    return out;
  }
  out.levels.resize(sampler.offsets());
  for (auto b : binary) sampler.push(b, [&](std::size_t o, std::uint8_t lvl) { out.levels[o].push_back(lvl); });
  return out;
}

DecodeReport sync_search(const SymbolCandidates& candidates, const DetectorConfig& cfg) {
  DecodeReport report;
  report.sync = cfg.sync;
  report.too_short = candidates.too_short;
  report.candidates = candidates.levels.size();
  if (candidates.levels.empty()) return report;

  DetectorConfig c = cfg;
  c.t2 = candidates.t2;
  FrameSearcher searcher(c, candidates.stride, candidates.levels.size());
  std::size_t longest = 0;
  for (const auto& l : candidates.levels) longest = std::max(longest, l.size());
  for (std::size_t k = 0; k < longest; ++k)
    for (std::size_t o = 0; o < candidates.levels.size(); ++o)
      if (k < candidates.levels[o].size()) searcher.push_level(o, candidates.levels[o][k]);
  searcher.finish();

  report.frames = searcher.take_frames();
  for (const auto& f : report.frames) {
    report.symbol_stream.insert(report.symbol_stream.end(), f.bits.begin(), f.bits.end());
    report.fm0_violations += f.fm0_violations;
  }
  return report;
}

// ---------------------------------------------------------------------------

namespace {

const DetectorConfig& checked(const DetectorConfig& cfg, double input_rate, const DecodeOptions& opts) {
  auto v = validate(cfg);
  if (!v.empty() && !opts.allow_violations) {
    std::string msg = "detector configuration violates constraints:";
    for (const auto& x : v) msg += "\n  " + x.message;
    throw ConfigError(msg, std::move(v));
  }
  if (!(input_rate > 0.0)) throw std::invalid_argument("decode: input sample rate must be positive");
  if (std::abs(input_rate * cfg.t1 - 1.0) > 1e-6) {
    throw std::invalid_argument("decode: buffer sample rate " + hz(input_rate) +
                                " does not match the configured F1 = " + hz(cfg.f1()));
  }
  return cfg;
}

}  // namespace

Decoder::Decoder(const DetectorConfig& cfg, double input_rate, DecodeOptions opts)
    : cfg_(checked(cfg, input_rate, opts)),
      opts_(opts),
      front_(input_rate, cfg.f3, cfg.t2),
      hpf_(cfg.f4, cfg.f2()),
      slicer_(threshold_window_samples(cfg.ta, cfg.t2), cfg.causal_threshold),
      sampler_(cfg.t2, cfg.ts),
      searcher_(cfg, sampler_.stride(), sampler_.offsets()) {
  traces_.sample_period = cfg.t2;
}

void Decoder::push(std::span<const Sample> iq) {
  lowpass_scratch_.clear();
  raw_scratch_.clear();
  front_.push(iq, lowpass_scratch_, opts_.keep_traces ? &raw_scratch_ : nullptr);
  feed_decimated();
}

void Decoder::feed_decimated() {
  for (double y : lowpass_scratch_) {
    if (!hpf_primed_) {
      hpf_.prime(y);
      hpf_primed_ = true;
    }
    const double h = hpf_.process(y);
    if (opts_.keep_traces) {
      traces_.lowpass.push_back(y);
      traces_.highpass.push_back(h);
    }
    slicer_.push(h, threshold_scratch_, bit_scratch_);
    ++decimated_;
  }
  if (opts_.keep_traces) traces_.power.insert(traces_.power.end(), raw_scratch_.begin(), raw_scratch_.end());
  feed_bits();
}

void Decoder::feed_bits() {
  for (auto b : bit_scratch_)
    sampler_.push(b, [this](std::size_t o, std::uint8_t lvl) { searcher_.push_level(o, lvl); });
  if (opts_.keep_traces) {
    traces_.threshold.insert(traces_.threshold.end(), threshold_scratch_.begin(), threshold_scratch_.end());
    traces_.binary.insert(traces_.binary.end(), bit_scratch_.begin(), bit_scratch_.end());
  }
  threshold_scratch_.clear();
  bit_scratch_.clear();
}

DecodeReport Decoder::finish() {
  slicer_.finish(threshold_scratch_, bit_scratch_);
  feed_bits();
  searcher_.finish();

  DecodeReport report;
  report.sync = cfg_.sync;
  report.candidates = sampler_.offsets();
  report.too_short = static_cast<double>(decimated_) * cfg_.t2 <
                     static_cast<double>(2 * cfg_.frame_bits) * cfg_.ts;
  report.frames = searcher_.take_frames();
  for (const auto& f : report.frames) {
    report.symbol_stream.insert(report.symbol_stream.end(), f.bits.begin(), f.bits.end());
    report.fm0_violations += f.fm0_violations;
  }
  if (opts_.keep_traces) report.traces = std::move(traces_);
  return report;
}

DecodeReport decode(const IqBuffer& iq, const DetectorConfig& cfg, DecodeOptions opts) {
  Decoder d(cfg, iq.sample_rate, opts);
  constexpr std::size_t chunk = 1 << 16;
  const std::span<const Sample> all(iq.samples);
  for (std::size_t i = 0; i < all.size(); i += chunk) d.push(all.subspan(i, std::min(chunk, all.size() - i)));
  return d.finish();
}

}  // namespace ambscatter
