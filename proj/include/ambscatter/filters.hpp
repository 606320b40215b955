#pragma once

// Recursive filters used by the source model and the reader front end.
// Bilinear-transform designs with frequency prewarping, so the -3 dB point
// lands exactly on the requested cutoff.

#include <array>
#include <complex>
#include <cstddef>

namespace ambscatter {

/// Second-order section, transposed direct form II, a0 normalized to 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
  double s1 = 0, s2 = 0;

  double process(double x) {
    const double y = b0 * x + s1;
    s1 = b1 * x - a1 * y + s2;
    s2 = b2 * x - a2 * y;
    return y;
  }

  /// Loads the state a constant input x would settle to (requires unity DC gain).
  void prime(double x) {
    s2 = (b2 - a2) * x;
    s1 = (b1 - a1) * x + s2;
  }

  std::complex<double> response(double f, double fs) const;
};

/// Fourth-order Butterworth low-pass as two cascaded sections; unity DC gain.
class ButterworthLowpass {
 public:
  ButterworthLowpass() = default;
  ButterworthLowpass(double cutoff, double sample_rate);

  double process(double x) { return sections_[1].process(sections_[0].process(x)); }

  void prime(double x) {
    for (auto& s : sections_) s.prime(x);
  }

  void reset() {
    for (auto& s : sections_) s.s1 = s.s2 = 0.0;
  }

  double magnitude(double f) const;

  /// Sum of squared impulse-response taps (white-noise power gain).
  double noise_gain() const;

  double cutoff() const { return cutoff_; }
  double sample_rate() const { return sample_rate_; }

 private:
  std::array<Biquad, 2> sections_{};
  double cutoff_ = 0.0;
  double sample_rate_ = 0.0;
};

/// First-order DC-blocking high-pass, unity gain at Nyquist.
class FirstOrderHighpass {
 public:
  FirstOrderHighpass() = default;
  FirstOrderHighpass(double cutoff, double sample_rate);

  double process(double x) {
    y_ = b0_ * (x - x_) + a1_ * y_;
    x_ = x;
    return y_;
  }

  /// Steady state for a constant input: output 0.
  void prime(double x) {
    x_ = x;
    y_ = 0.0;
  }

  double magnitude(double f) const;

 private:
  double b0_ = 1.0, a1_ = 0.0;
  double x_ = 0.0, y_ = 0.0;
  double cutoff_ = 0.0;
  double sample_rate_ = 0.0;
};

}  // namespace ambscatter
