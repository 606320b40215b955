#include "ambscatter/ambient_source.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "ambscatter/filters.hpp"

namespace ambscatter {

namespace {

constexpr std::size_t kWarmup = 256;

// Independent streams for the Gaussian samples and the TDD mask.
enum Stream : std::uint32_t { kSamples = 0, kMask = 1 };

std::seed_seq make_seed(std::uint64_t seed, Stream stream) {
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(stream)};
}

std::size_t sample_count(double duration, double sample_rate) {
  return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

}  // namespace

const char* to_string(SourceKind k) {
  switch (k) {
    case SourceKind::tv: return "tv";
    case SourceKind::four_g: return "4g";
    case SourceKind::five_g_tdd: return "5g_tdd";
  }
  return "?";
}

SourceKind source_kind_from_string(const std::string& s) {
  if (s == "tv") return SourceKind::tv;
  if (s == "4g") return SourceKind::four_g;
  if (s == "5g_tdd" || s == "5g") return SourceKind::five_g_tdd;
  throw std::invalid_argument("unknown source kind '" + s + "' (expected tv, 4g or 5g_tdd)");
}

SourceProfile SourceProfile::tv(std::uint64_t seed) {
  SourceProfile p;
  p.kind = SourceKind::tv;
  p.rng_seed = seed;
  return p;
}

SourceProfile SourceProfile::four_g(std::uint64_t seed) {
  SourceProfile p;
  p.kind = SourceKind::four_g;
  p.rng_seed = seed;
  return p;
}

SourceProfile SourceProfile::five_g(std::uint64_t seed) {
  SourceProfile p;
  p.kind = SourceKind::five_g_tdd;
  p.tdd_period = 1e-3;
  p.duty_cycle = 0.7;
  p.burst_jitter = 0.05;
  p.rng_seed = seed;
  return p;
}

double SourceProfile::average_power() const {
  return kind == SourceKind::five_g_tdd ? mean_power * duty_cycle : mean_power;
}

void SourceProfile::check() const {
  if (!(mean_power > 0.0)) throw std::invalid_argument("source: mean_power must be > 0");
  if (kind != SourceKind::five_g_tdd) return;
  if (!(tdd_period > 0.0)) throw std::invalid_argument("source: tdd_period must be > 0");
  if (!(duty_cycle > 0.0 && duty_cycle <= 1.0))
    throw std::invalid_argument("source: duty_cycle must lie in (0, 1]");
  if (!(burst_jitter >= 0.0 && burst_jitter < 1.0))
    throw std::invalid_argument("source: burst_jitter must lie in [0, 1)");
}

std::vector<std::uint8_t> tdd_mask(const SourceProfile& profile, std::size_t n_samples,
                                   double sample_rate) {
  profile.check();
  const double period = profile.tdd_period * sample_rate;
  if (!(period >= 10.0)) {
    throw std::invalid_argument("source: TDD period spans " + std::to_string(period) +
                                " samples, need at least 10");
  }
  auto seq = make_seed(profile.rng_seed, kMask);
  std::mt19937_64 rng(seq);
  boost::random::uniform_real_distribution<double> spread(-1.0, 1.0);

  std::vector<std::uint8_t> mask(n_samples, 0);
  for (std::size_t p = 0;; ++p) {
    const auto begin = static_cast<std::size_t>(std::llround(static_cast<double>(p) * period));
    if (begin >= n_samples) break;
    const auto end = static_cast<std::size_t>(std::llround(static_cast<double>(p + 1) * period));
    const double len = static_cast<double>(end - begin);
    double frac = profile.duty_cycle;
    if (profile.burst_jitter > 0.0) frac *= 1.0 + profile.burst_jitter * spread(rng);
    const auto on = static_cast<std::size_t>(std::llround(std::clamp(frac, 0.0, 1.0) * len));
    std::fill(mask.begin() + static_cast<std::ptrdiff_t>(begin),
              mask.begin() + static_cast<std::ptrdiff_t>(std::min(begin + on, n_samples)), 1);
  }
  return mask;
}

IqBuffer generate(const SourceProfile& profile, double duration, double sample_rate) {
  if (!(duration > 0.0)) throw std::invalid_argument("generate: duration must be > 0");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("generate: sample rate must be > 0");
  profile.check();
  const std::size_t n = sample_count(duration, sample_rate);
  if (n == 0) throw std::invalid_argument("generate: duration shorter than one sample");

  std::vector<std::uint8_t> mask;
  if (profile.kind == SourceKind::five_g_tdd) mask = tdd_mask(profile, n, sample_rate);

  auto seq = make_seed(profile.rng_seed, kSamples);
  boost::random::mt19937_64 rng(seq);
  boost::random::normal_distribution<double> gauss;

  ButterworthLowpass lp_i(kSourceBandwidthFraction * sample_rate / 2.0, sample_rate);
  ButterworthLowpass lp_q = lp_i;
  // White input with unit variance per component; scale so the shaped
  // complex process has power mean_power.
  const double scale = std::sqrt(profile.mean_power / (2.0 * lp_i.noise_gain()));

  for (std::size_t i = 0; i < kWarmup; ++i) {
    lp_i.process(gauss(rng));
    lp_q.process(gauss(rng));
  }

  IqBuffer out;
  out.sample_rate = sample_rate;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double re = lp_i.process(gauss(rng)) * scale;
    const double im = lp_q.process(gauss(rng)) * scale;
    out.samples[i] = Sample(static_cast<float>(re), static_cast<float>(im));
  }
  if (!mask.empty()) {
    for (std::size_t i = 0; i < n; ++i)
      if (!mask[i]) out.samples[i] = Sample(0.0f, 0.0f);
  }
  return out;
}

}  // namespace ambscatter
