#include <doctest.h>

#include "ambscatter/ambient_source.hpp"
#include "ambscatter/channel_sim.hpp"

using namespace ambscatter;

namespace {

// alternating connected/disconnected levels covering most of the buffer
SwitchWaveform square_tag(std::size_t levels, double ts, double offset = 0.0) {
  SwitchWaveform w;
  for (std::size_t i = 0; i < levels; ++i) w.levels.levels.push_back(static_cast<std::uint8_t>(i % 2));
  w.symbol_period = ts;
  w.start_offset = offset;
  return w;
}

IqBuffer constant_source(std::size_t n, Sample v, double rate = 1e6) {
  IqBuffer b;
  b.samples.assign(n, v);
  b.sample_rate = rate;
  return b;
}

}  // namespace

TEST_SUITE("channel_sim") {

TEST_CASE("no backscatter path leaves h times source") {
  const auto src = generate(SourceProfile::tv(2), 0.01, 1e6);
  ChannelParams ch;
  ch.g_cascade = 0.0;
  ch.h_direct = {0.5, -0.25};
  const auto out = apply(src, square_tag(20, 4e-4), ch, 1);
  REQUIRE(out.samples.size() == src.samples.size());
  for (std::size_t i = 0; i < src.samples.size(); ++i) {
    const auto e = Sample(0.5f, -0.25f) * src.samples[i];
    CHECK(std::abs(out.samples[i] - e) <= 1e-6f * std::abs(e) + 1e-12f);
  }
}

TEST_CASE("per-state power on a constant source") {
  ChannelParams ch;
  ch.h_direct = {0.8, 0.1};
  ch.g_cascade = {0.3, -0.2};
  ch.refl_connected = {-0.5, 0.0};
  ch.refl_disconnected = {0.0, 0.7};
  const double P = 2.0;
  const auto src = constant_source(10000, Sample(1.0f, 0.0f) * static_cast<float>(std::sqrt(P)));
  const auto out = apply(src, square_tag(10, 1e-3), ch, 1);
  const auto lv = switch_levels_per_sample(square_tag(10, 1e-3), 10000, 1e6);
  for (std::size_t i = 0; i < 10000; i += 37) {
    const auto s = switch_state_of(lv[i]);
    CHECK(std::norm(out.samples[i]) == doctest::Approx(std::norm(ch.state_gain(s)) * P).epsilon(1e-5));
  }
  CHECK(state_power_gap(ch, P) ==
        doctest::Approx(std::abs(std::norm(ch.state_gain(SwitchState::disconnected)) -
                                 std::norm(ch.state_gain(SwitchState::connected))) * P));
}

TEST_CASE("contrast examples") {
  ChannelParams ch;
  ch.g_cascade = 0.0;
  CHECK(contrast(ch).ratio == doctest::Approx(1.0));
  CHECK_FALSE(contrast(ch).infinite);

  ChannelParams pure;
  pure.h_direct = 0.0;
  pure.g_cascade = 1.0;
  pure.refl_connected = 0.0;
  pure.refl_disconnected = 1.0;
  CHECK(contrast(pure).infinite);

  ChannelParams ex;
  ex.h_direct = 1.0;
  ex.g_cascade = 0.1;
  ex.refl_connected = 0.0;
  ex.refl_disconnected = 1.0;
  CHECK(contrast(ex).ratio == doctest::Approx(1.21));

  for (double c : {1.01, 1.2, 1.5, 4.0}) {
    const auto w = with_contrast(ChannelParams{}, c);
    CHECK(contrast(w).ratio == doctest::Approx(c).epsilon(1e-9));
  }
  CHECK(to_db(from_db(3.0)) == doctest::Approx(3.0));
}

TEST_CASE("configured SNR is recovered from a generated buffer") {
  const double ts = 1e-3;
  const auto src = generate(SourceProfile::tv(5), 0.4, 1e6);
  const auto tag = square_tag(400, ts);
  for (double snr : {-5.0, 0.0, 10.0}) {
    ChannelParams ch = with_contrast(ChannelParams{}, 1.5);
    ch.noise_power = noise_power_for_snr(ch, 1.0, snr);
    ChannelParams clean = ch;
    clean.noise_power = 0.0;
    const auto noisy = apply(src, tag, ch, 77);
    const auto ref = apply(src, tag, clean, 77);
    const auto lv = switch_levels_per_sample(tag, src.samples.size(), 1e6);
    double p[2] = {0, 0}, n[2] = {0, 0}, w = 0;
    for (std::size_t i = 0; i < noisy.samples.size(); ++i) {
      p[lv[i]] += std::norm(noisy.samples[i]);
      n[lv[i]] += 1;
      w += std::norm(noisy.samples[i] - ref.samples[i]);
    }
    const double gap = std::abs(p[1] / n[1] - p[0] / n[0]);
    const double measured = to_db(gap / (w / static_cast<double>(noisy.samples.size())));
    CHECK(std::abs(measured - snr) <= 0.5);
  }
}

TEST_CASE("noiseless apply is deterministic and linear in the source") {
  const auto a = generate(SourceProfile::tv(1), 0.02, 1e6);
  const auto b = generate(SourceProfile::tv(2), 0.02, 1e6);
  IqBuffer sum = a;
  for (std::size_t i = 0; i < sum.samples.size(); ++i) sum.samples[i] = 2.0f * a.samples[i] + b.samples[i];
  ChannelParams ch = with_contrast(ChannelParams{}, 1.3);
  ch.doppler_hz = 3.0;
  const auto tag = square_tag(30, 5e-4, 1e-3);
  const auto ya = apply(a, tag, ch, 1), yb = apply(b, tag, ch, 1), ys = apply(sum, tag, ch, 1);
  CHECK(apply(a, tag, ch, 9).samples == ya.samples);
  for (std::size_t i = 0; i < ys.samples.size(); ++i) {
    const auto e = 2.0f * ya.samples[i] + yb.samples[i];
    CHECK(std::abs(ys.samples[i] - e) <= 1e-5f * (1.0f + std::abs(e)));
  }
  ch.noise_power = 0.1;
  CHECK(apply(a, tag, ch, 9).samples == apply(a, tag, ch, 9).samples);
  CHECK(apply(a, tag, ch, 9).samples != apply(a, tag, ch, 10).samples);
}

TEST_CASE("energy accounting") {
  const auto src = generate(SourceProfile::tv(6), 1.0, 1e6);
  ChannelParams ch = with_contrast(ChannelParams{}, 1.4);
  ch.noise_power = 0.05;
  // 30% disconnected occupancy
  SwitchWaveform tag;
  for (int i = 0; i < 1000; ++i) tag.levels.levels.push_back(i % 10 < 3);
  tag.symbol_period = 1e-3;
  const auto out = apply(src, tag, ch, 3);
  double acc = 0;
  for (auto s : out.samples) acc += std::norm(s);
  const double expect = 0.7 * std::norm(ch.state_gain(SwitchState::connected)) +
                        0.3 * std::norm(ch.state_gain(SwitchState::disconnected)) + ch.noise_power;
  CHECK(acc / static_cast<double>(out.samples.size()) == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("resting state and overrun") {
  const auto src = constant_source(5000, Sample(1.0f, 0.0f));
  const auto tag = square_tag(2, 1e-3, 2e-3);  // levels 0,1 over [2 ms, 4 ms)
  const auto lv = switch_levels_per_sample(tag, 5000, 1e6);
  CHECK(lv[0] == 0);
  CHECK(lv[1999] == 0);
  CHECK(lv[2000] == 0);
  CHECK(lv[3000] == 1);
  CHECK(lv[3999] == 1);
  CHECK(lv[4000] == 0);
  CHECK_THROWS_AS(apply(src, square_tag(6, 1e-3), ChannelParams{}, 1), std::invalid_argument);
}

TEST_CASE("parameter checks") {
  ChannelParams ch;
  ch.noise_power = -1.0;
  CHECK_THROWS_AS(ch.check(), std::invalid_argument);
  ch = ChannelParams{};
  ch.refl_disconnected = {1.1, 0.0};
  CHECK_THROWS_AS(ch.check(), std::invalid_argument);
  ch = ChannelParams{};
  ch.refl_disconnected = ch.refl_connected;
  CHECK_THROWS_AS(with_contrast(ch, 1.2), std::invalid_argument);
}

}
