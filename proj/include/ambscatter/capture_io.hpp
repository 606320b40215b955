#pragma once

// Raw IQ capture files. Interleaved I,Q:
//   cf32le  little-endian float32 pairs, 8 bytes per sample
//   cu8     offset-binary bytes, v -> (v - 127.5) / 127.5, 2 bytes per sample

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "ambscatter/iq_buffer.hpp"

namespace ambscatter {

enum class CaptureFormat { cf32le, cu8 };

const char* to_string(CaptureFormat f);
CaptureFormat capture_format_from_string(const std::string& s);
std::size_t bytes_per_sample(CaptureFormat f);

class CaptureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws CaptureError on unreadable files and on a length that is not a
/// multiple of the sample stride (message names the byte offset of the
/// dangling tail).
IqBuffer read_capture(const std::filesystem::path& path, CaptureFormat format, double sample_rate,
                      double center_freq = 0.0);

struct WriteStats {
  std::size_t samples = 0;
  std::size_t clipped = 0;  // cu8 samples with a component outside [-1, 1]
};

WriteStats write_capture(const IqBuffer& buf, const std::filesystem::path& path, CaptureFormat format);

std::uint8_t quantize_cu8(float v, bool& clipped);
inline float dequantize_cu8(std::uint8_t b) { return (static_cast<float>(b) - 127.5f) / 127.5f; }

}  // namespace ambscatter
