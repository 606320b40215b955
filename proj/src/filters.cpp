#include "ambscatter/filters.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ambscatter {

namespace {

void check_cutoff(double cutoff, double fs, const char* what) {
  if (!(fs > 0.0)) throw std::invalid_argument(std::string(what) + ": sample rate must be positive");
  if (!(cutoff > 0.0) || !(cutoff < fs / 2.0)) {
    throw std::invalid_argument(std::string(what) + ": cutoff " + std::to_string(cutoff) +
                                " Hz must lie in (0, " + std::to_string(fs / 2.0) + ") Hz");
  }
}

}  // namespace

std::complex<double> Biquad::response(double f, double fs) const {
  const auto z1 = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
  const auto z2 = z1 * z1;
  return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

ButterworthLowpass::ButterworthLowpass(double cutoff, double sample_rate)
    : cutoff_(cutoff), sample_rate_(sample_rate) {
  check_cutoff(cutoff, sample_rate, "low-pass");
  constexpr int order = 4;
  const double k = std::tan(std::numbers::pi * cutoff / sample_rate);
  for (int i = 0; i < order / 2; ++i) {
    const double q = 1.0 / (2.0 * std::cos(std::numbers::pi * (2 * i + 1) / (2.0 * order)));
    const double norm = 1.0 / (1.0 + k / q + k * k);
    auto& s = sections_[static_cast<std::size_t>(i)];
    s.b0 = k * k * norm;
    s.b1 = 2.0 * s.b0;
    s.b2 = s.b0;
    s.a1 = 2.0 * (k * k - 1.0) * norm;
    s.a2 = (1.0 - k / q + k * k) * norm;
  }
}

double ButterworthLowpass::magnitude(double f) const {
  return std::abs(sections_[0].response(f, sample_rate_) * sections_[1].response(f, sample_rate_));
}

double ButterworthLowpass::noise_gain() const {
  ButterworthLowpass f = *this;
  f.reset();
  double sum = 0.0;
  // Long enough for the slowest pole to decay well below double precision.
  const auto n = static_cast<std::size_t>(64.0 * sample_rate_ / cutoff_) + 64;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = f.process(i == 0 ? 1.0 : 0.0);
    sum += h * h;
  }
  return sum;
}

FirstOrderHighpass::FirstOrderHighpass(double cutoff, double sample_rate)
    : cutoff_(cutoff), sample_rate_(sample_rate) {
  check_cutoff(cutoff, sample_rate, "high-pass");
  const double k = std::tan(std::numbers::pi * cutoff / sample_rate);
  b0_ = 1.0 / (1.0 + k);
  a1_ = (1.0 - k) / (1.0 + k);
}

double FirstOrderHighpass::magnitude(double f) const {
  const auto z1 = std::polar(1.0, -2.0 * std::numbers::pi * f / sample_rate_);
  return std::abs(b0_ * (1.0 - z1) / (1.0 - a1_ * z1));
}

}  // namespace ambscatter
