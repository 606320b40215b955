#include "ambscatter/eval_harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "ambscatter/config.hpp"

namespace ambscatter {

LinkConfig LinkConfig::tv_4g() {
  LinkConfig l;
  l.source = SourceProfile::tv();
  l.detector = DetectorConfig::tv_4g();
  l.tag.image = default_image();
  l.tag.ts = l.detector.ts;
  l.channel = with_contrast(ChannelParams{}, 1.2);
  return l;
}

LinkConfig LinkConfig::five_g() {
  LinkConfig l = tv_4g();
  l.source = SourceProfile::five_g();
  l.detector = DetectorConfig::five_g();
  l.tag.ts = l.detector.ts;
  return l;
}

void LinkConfig::check() const {
  source.check();
  channel.check();
  for (const auto& v : validate(detector)) {
    if (v.constraint == Constraint::positive_parameters || v.constraint == Constraint::frame_layout)
      throw std::invalid_argument("link: " + v.message);
  }
  if (!(tag.ts > 0.0)) throw std::invalid_argument("link: tag symbol period must be > 0");
  if (tag.repetitions == 0) throw std::invalid_argument("link: tag needs at least one repetition");
  if (tag.image.rows() != detector.rows || tag.image.cols() != detector.cols)
    throw std::invalid_argument("link: tag image size differs from the detector's");
}

PixelImage default_image() {
  return parse_image_text(
      "...........\n"
      ".###..#..#.\n"
      ".#.#..#.#..\n"
      ".#.#..##...\n"
      ".#.#..##...\n"
      ".#.#..#.#..\n"
      ".###..#..#.\n"
      "...........\n");
}

std::uint64_t mix_seed(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t point, std::uint64_t trial) {
  return mix_seed(mix_seed(mix_seed(base) ^ point) ^ (trial * 0xd6e8feb86659fd93ull));
}

Simulation simulate_link(const LinkConfig& link, std::uint64_t seed) {
  link.check();
  const auto frame = frame_from_image(link.tag.image, link.tag.sync);
  Simulation sim;
  sim.seed = seed;
  sim.source_seed = mix_seed(seed ^ 0x736f75726365ull);
  sim.noise_seed = mix_seed(seed ^ 0x6e6f697365ull);

  const double rate = link.detector.f1();
  const double lead_base = link.lead_time >= 0.0 ? link.lead_time : link.detector.ta;
  // Jitter in [0, 2 ts) from the top 53 bits of a derived word.
  const double u = static_cast<double>(mix_seed(seed ^ 0x6c656164ull) >> 11) * 0x1.0p-53;
  const double lead = lead_base + u * 2.0 * link.tag.ts;

  sim.tag.levels = fm0_encode_repeated(frame.bits(), link.tag.repetitions, link.tag.initial_level);
  sim.tag.symbol_period = link.tag.ts;
  sim.tag.start_offset = lead;
  const double duration = lead + sim.tag.duration() + link.detector.ta;
  const double frame_time = 2.0 * static_cast<double>(frame.bits().size()) * link.tag.ts;
  for (std::size_t r = 0; r < link.tag.repetitions; ++r)
    sim.frame_starts.push_back(lead + static_cast<double>(r) * frame_time);

  SourceProfile src = link.source;
  src.rng_seed = sim.source_seed;
  sim.iq = apply(generate(src, duration, rate), sim.tag, link.channel, sim.noise_seed);
  return sim;
}

TrialOutcome run_trial(const LinkConfig& link, std::uint64_t seed) {
  const auto sim = simulate_link(link, seed);
  DecodeOptions opts;
  opts.allow_violations = true;
  const auto report = decode(sim.iq, link.detector, opts);

  TrialOutcome out;
  out.frames = report.frames.size();
  const auto truth = image_to_bits(link.tag.image);
  if (report.frames.empty()) {
    out.pixel_errors = truth.size();
    return out;
  }
  const auto& f = report.frames.front();
  out.detected = true;
  out.sync_matches = f.sync_matches;
  const auto got = f.image.pixels();
  for (std::size_t i = 0; i < truth.size(); ++i) out.bit_errors += got[i] != truth[i];
  out.pixel_errors = out.bit_errors;
  return out;
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::snr_db: return "snr_db";
    case SweepAxis::contrast_db: return "contrast_db";
    case SweepAxis::doppler_hz: return "doppler_hz";
    case SweepAxis::ts: return "ts";
  }
  return "?";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "snr_db") return SweepAxis::snr_db;
  if (s == "contrast_db") return SweepAxis::contrast_db;
  if (s == "doppler_hz") return SweepAxis::doppler_hz;
  if (s == "ts") return SweepAxis::ts;
  throw std::invalid_argument("unknown sweep axis '" + s + "'");
}

LinkConfig apply_axis(const LinkConfig& base, SweepAxis axis, double value) {
  LinkConfig l = base;
  switch (axis) {
    case SweepAxis::snr_db:
      l.channel.noise_power = noise_power_for_snr(l.channel, l.source.average_power(), value);
      break;
    case SweepAxis::contrast_db:
      l.channel = with_contrast(l.channel, from_db(value));
      break;
    case SweepAxis::doppler_hz:
      l.channel.doppler_hz = value;
      break;
    case SweepAxis::ts:
      l.tag.ts = value;
      l.detector.ts = value;
      break;
  }
  return l;
}

void SweepSpec::check() const {
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  if (trials_per_point < 1) throw std::invalid_argument("sweep: trials_per_point must be >= 1");
  if (grid.size() > 1) {
    const bool up = grid[1] > grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (up ? !(grid[i] > grid[i - 1]) : !(grid[i] < grid[i - 1]))
        throw std::invalid_argument("sweep: grid must be strictly monotonic");
    }
  }
  base.check();
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double SweepPoint::bit_error_rate() const { return ratio(bit_errors, bits_compared); }
double SweepPoint::pixel_error_rate() const { return ratio(pixel_errors, pixels_total); }
double SweepPoint::frame_detection_rate() const { return ratio(detected, trials); }
double SweepPoint::mean_score() const { return ratio(sync_matches, sync_bits); }

SweepResult run_sweep(const SweepSpec& spec) {
  spec.check();
  const std::size_t points = spec.grid.size();
  const std::size_t per = spec.trials_per_point;

  std::vector<LinkConfig> links;
  links.reserve(points);
  for (double v : spec.grid) links.push_back(apply_axis(spec.base, spec.axis, v));

  std::vector<TrialOutcome> outcomes(points * per);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < outcomes.size(); t = next++) {
      const std::size_t p = t / per;
      outcomes[t] = run_trial(links[p], trial_seed(spec.rng_seed, p, t % per));
    }
  };
  unsigned n = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, outcomes.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  }

  SweepResult result;
  result.spec = spec;
  const std::size_t payload = spec.base.tag.image.size();
  for (std::size_t p = 0; p < points; ++p) {
    SweepPoint pt;
    pt.value = spec.grid[p];
    pt.noise_power = links[p].channel.noise_power;
    pt.contrast = contrast(links[p].channel).ratio;
    for (std::size_t t = 0; t < per; ++t) {
      const auto& o = outcomes[p * per + t];
      ++pt.trials;
      pt.pixels_total += payload;
      pt.pixel_errors += o.pixel_errors;
      if (o.detected) {
        ++pt.detected;
        pt.bit_errors += o.bit_errors;
        pt.bits_compared += payload;
        pt.sync_matches += o.sync_matches;
        pt.sync_bits += links[p].detector.sync.size();
      } else {
        ++pt.missed;
      }
    }
    result.points.push_back(pt);
  }
  return result;
}

void SweepResult::write_csv(std::ostream& os) const {
  os << to_string(spec.axis) << ",ber,per,fdr,mean_score,trials\n";
  os << std::setprecision(10);
  for (const auto& p : points) {
    os << p.value << ',' << p.bit_error_rate() << ',' << p.pixel_error_rate() << ','
       << p.frame_detection_rate() << ',' << p.mean_score() << ',' << p.trials << '\n';
  }
}

std::string SweepResult::to_json() const {
  nlohmann::json j;
  j["axis"] = to_string(spec.axis);
  j["grid"] = spec.grid;
  j["trials_per_point"] = spec.trials_per_point;
  j["rng_seed"] = spec.rng_seed;
  j["seed_rule"] = "trial_seed(rng_seed, point_index, trial_index), splitmix64 chain";
  j["snr_definition"] = "10*log10(|P_disconnected - P_connected| / noise_power), average source power";
  j["ber_definition"] = "payload bit errors of detected frames / payload bits of detected frames";
  j["per_definition"] = "pixel errors / pixels of all trials; a missed frame counts every pixel";
  j["config"] = link_to_json(spec.base);
  auto& rows = j["points"] = nlohmann::json::array();
  for (const auto& p : points) {
    rows.push_back({{"value", p.value},
                    {"trials", p.trials},
                    {"detected", p.detected},
                    {"missed", p.missed},
                    {"bit_errors", p.bit_errors},
                    {"bits_compared", p.bits_compared},
                    {"pixel_errors", p.pixel_errors},
                    {"pixels_total", p.pixels_total},
                    {"ber", p.bit_error_rate()},
                    {"per", p.pixel_error_rate()},
                    {"fdr", p.frame_detection_rate()},
                    {"mean_score", p.mean_score()},
                    {"noise_power", p.noise_power},
                    {"contrast", p.contrast}});
  }
  return j.dump(2);
}

BenchResult bench_throughput(double duration, const LinkConfig& link) {
  if (!(duration >= 1.0)) throw std::invalid_argument("bench: duration must be at least 1 s");
  link.check();
  const double rate = link.detector.f1();
  SourceProfile src = link.source;
  auto source = generate(src, duration, rate);

  SwitchWaveform tag;
  const auto frame = frame_from_image(link.tag.image, link.tag.sync).bits();
  const double frame_time = 2.0 * static_cast<double>(frame.size()) * link.tag.ts;
  const auto reps = static_cast<std::size_t>(std::max(1.0, std::floor((duration - 0.01) / frame_time)));
  tag.levels = fm0_encode_repeated(frame, reps, link.tag.initial_level);
  tag.symbol_period = link.tag.ts;
  tag.start_offset = 0.0;
  if (tag.duration() > source.duration()) tag.levels.levels.resize(static_cast<std::size_t>(
      std::floor(source.duration() / link.tag.ts)));
  const auto iq = apply(source, tag, link.channel, src.rng_seed);

  DecodeOptions opts;
  opts.allow_violations = true;
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = decode(iq, link.detector, opts);
  const auto t1 = std::chrono::steady_clock::now();

  BenchResult r;
  r.frames = report.frames.size();
  r.samples = iq.samples.size();
  r.seconds = std::chrono::duration<double>(t1 - t0).count();
  r.samples_per_second = static_cast<double>(r.samples) / r.seconds;
  return r;
}

}  // namespace ambscatter
