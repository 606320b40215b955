#include "ambscatter/channel_sim.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

namespace ambscatter {

void ChannelParams::check() const {
  if (!(noise_power >= 0.0)) throw std::invalid_argument("channel: noise_power must be >= 0");
  if (std::abs(refl_connected) > 1.0 || std::abs(refl_disconnected) > 1.0)
    throw std::invalid_argument("channel: reflection coefficients must satisfy |r| <= 1");
  if (!std::isfinite(doppler_hz)) throw std::invalid_argument("channel: doppler_hz not finite");
}

Contrast contrast(const ChannelParams& ch) {
  const double on = std::norm(ch.state_gain(SwitchState::disconnected));
  const double off = std::norm(ch.state_gain(SwitchState::connected));
  if (off == 0.0) return Contrast{std::numeric_limits<double>::infinity(), true};
  return Contrast{on / off, false};
}

double state_power_gap(const ChannelParams& ch, double source_power) {
  return std::abs(std::norm(ch.state_gain(SwitchState::disconnected)) -
                  std::norm(ch.state_gain(SwitchState::connected))) *
         source_power;
}

double noise_power_for_snr(const ChannelParams& ch, double source_power, double snr_db) {
  const double gap = state_power_gap(ch, source_power);
  if (!(gap > 0.0)) throw std::invalid_argument("SNR undefined: the two states have equal power");
  return gap / from_db(snr_db);
}

ChannelParams with_contrast(ChannelParams ch, double contrast_ratio) {
  if (!(contrast_ratio > 0.0)) throw std::invalid_argument("contrast must be > 0");
  const double mag = std::abs(ch.g_cascade);
  const Complex dir = mag > 0.0 ? ch.g_cascade / mag : Complex{1.0, 0.0};
  // |h + s a|^2 - C |h + s b|^2 = 0, quadratic in the real gain s >= 0.
  const Complex a = dir * ch.refl_disconnected;
  const Complex b = dir * ch.refl_connected;
  const Complex& h = ch.h_direct;
  const double qa = std::norm(a) - contrast_ratio * std::norm(b);
  const double qb = 2.0 * (std::real(std::conj(h) * a) - contrast_ratio * std::real(std::conj(h) * b));
  const double qc = (1.0 - contrast_ratio) * std::norm(h);

  double s = -1.0;
  if (qc == 0.0) {
    s = 0.0;
  } else if (std::abs(qa) < 1e-300) {
    if (qb != 0.0) s = -qc / qb;
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double r = std::sqrt(disc);
      const double s1 = (-qb - r) / (2.0 * qa);
      const double s2 = (-qb + r) / (2.0 * qa);
      for (double cand : {std::min(s1, s2), std::max(s1, s2)}) {
        if (cand > 0.0) {
          s = cand;
          break;
        }
      }
    }
  }
  if (s < 0.0) {
    throw std::invalid_argument("no cascade gain reaches contrast " + std::to_string(contrast_ratio) +
                                " with these reflection coefficients");
  }
  ch.g_cascade = dir * s;
  return ch;
}

std::vector<std::uint8_t> switch_levels_per_sample(const SwitchWaveform& tag, std::size_t n_samples,
                                                   double sample_rate) {
  if (!(tag.symbol_period > 0.0)) throw std::invalid_argument("tag: symbol period must be > 0");
  if (!(tag.start_offset >= 0.0)) throw std::invalid_argument("tag: start offset must be >= 0");
  const double buffer_end = static_cast<double>(n_samples) / sample_rate;
  const double tag_end = tag.start_offset + tag.duration();
  if (tag_end > buffer_end * (1.0 + 1e-12)) {
    throw std::invalid_argument("tag waveform ends at " + std::to_string(tag_end) +
                                " s, past the buffer end at " + std::to_string(buffer_end) + " s");
  }
  const auto& levels = tag.levels.levels;
  const std::uint8_t rest = level_of(SwitchState::connected);
  std::vector<std::uint8_t> out(n_samples, rest);
  for (std::size_t n = 0; n < n_samples; ++n) {
    const double u = (static_cast<double>(n) / sample_rate - tag.start_offset) / tag.symbol_period;
    if (u < 0.0) continue;
    const auto k = static_cast<std::size_t>(u);
    if (k >= levels.size()) break;
    out[n] = levels[k];
  }
  return out;
}

namespace {

// plain product; std::complex operator* takes the slow Annex G path
inline Sample mul(Complex g, Sample x) {
  const double xr = x.real(), xi = x.imag();
  return Sample(static_cast<float>(g.real() * xr - g.imag() * xi),
                static_cast<float>(g.real() * xi + g.imag() * xr));
}

}  // namespace

IqBuffer apply(const IqBuffer& source, const SwitchWaveform& tag, const ChannelParams& ch,
               std::uint64_t rng_seed) {
  ch.check();
  if (!(source.sample_rate > 0.0)) throw std::invalid_argument("apply: source sample rate must be > 0");
  const std::size_t n = source.samples.size();
  const auto levels = switch_levels_per_sample(tag, n, source.sample_rate);

  IqBuffer out;
  out.sample_rate = source.sample_rate;
  out.center_freq = source.center_freq;
  out.capture_time = source.capture_time;
  out.samples.resize(n);

  const Complex refl[2] = {ch.reflection(switch_state_of(0)), ch.reflection(switch_state_of(1))};
  if (ch.doppler_hz == 0.0) {
    const Complex gain[2] = {ch.h_direct + ch.g_cascade * refl[0], ch.h_direct + ch.g_cascade * refl[1]};
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = mul(gain[levels[i]], source.samples[i]);
  } else {
    const double cycles_per_sample = ch.doppler_hz / source.sample_rate;
    for (std::size_t i = 0; i < n; ++i) {
      const double cycles = std::fmod(cycles_per_sample * static_cast<double>(i), 1.0);
      const Complex rot = std::polar(1.0, 2.0 * std::numbers::pi * cycles);
      out.samples[i] = mul(ch.h_direct + ch.g_cascade * refl[levels[i]] * rot, source.samples[i]);
    }
  }

  if (ch.noise_power > 0.0) {
    std::seed_seq seq{static_cast<std::uint32_t>(rng_seed), static_cast<std::uint32_t>(rng_seed >> 32),
                      0x6e6f6973u};
    boost::random::mt19937_64 rng(seq);
    boost::random::normal_distribution<double> gauss(0.0, std::sqrt(ch.noise_power / 2.0));
    for (auto& s : out.samples) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      s += Sample(static_cast<float>(re), static_cast<float>(im));
    }
  }
  return out;
}

}  // namespace ambscatter
