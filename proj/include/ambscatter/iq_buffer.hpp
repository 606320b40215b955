#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace ambscatter {

using Sample = std::complex<float>;

/// Complex baseband capture or simulation output.
struct IqBuffer {
  std::vector<Sample> samples;
  double sample_rate = 0.0;  // Hz
  double center_freq = 0.0;  // Hz, metadata only
  std::optional<std::string> capture_time;

  double duration() const {
    return sample_rate > 0.0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

}  // namespace ambscatter
