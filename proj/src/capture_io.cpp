#include "ambscatter/capture_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace ambscatter {

const char* to_string(CaptureFormat f) { return f == CaptureFormat::cf32le ? "cf32le" : "cu8"; }

CaptureFormat capture_format_from_string(const std::string& s) {
  if (s == "cf32le" || s == "cf32") return CaptureFormat::cf32le;
  if (s == "cu8") return CaptureFormat::cu8;
  throw std::invalid_argument("unknown capture format '" + s + "' (expected cf32le or cu8)");
}

std::size_t bytes_per_sample(CaptureFormat f) { return f == CaptureFormat::cf32le ? 8 : 2; }

namespace {

float load_f32le(const unsigned char* p) {
  std::uint32_t u = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
                    std::uint32_t(p[3]) << 24;
  return std::bit_cast<float>(u);
}

void store_f32le(float v, unsigned char* p) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  p[0] = u & 0xff;
  p[1] = (u >> 8) & 0xff;
  p[2] = (u >> 16) & 0xff;
  p[3] = u >> 24;
}

}  // namespace

std::uint8_t quantize_cu8(float v, bool& clipped) {
  // round half up
  const double q = std::floor(static_cast<double>(v) * 127.5 + 127.5 + 0.5);
  clipped = v < -1.0f || v > 1.0f || std::isnan(v);
  if (std::isnan(v)) return 128;
  if (q < 0.0) return 0;
  if (q > 255.0) return 255;
  return static_cast<std::uint8_t>(q);
}

IqBuffer read_capture(const std::filesystem::path& path, CaptureFormat format, double sample_rate,
                      double center_freq) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("read_capture: sample_rate must be > 0");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CaptureError("cannot open capture " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw CaptureError("read error on " + path.string());

  const std::size_t stride = bytes_per_sample(format);
  if (bytes.size() % stride != 0) {
    const std::size_t offset = bytes.size() - bytes.size() % stride;
    throw CaptureError(path.string() + ": truncated " + to_string(format) + " capture, " +
                       std::to_string(bytes.size()) + " bytes is not a multiple of " + std::to_string(stride) +
                       "; partial sample at byte offset " + std::to_string(offset));
  }

  IqBuffer buf;
  buf.sample_rate = sample_rate;
  buf.center_freq = center_freq;
  const std::size_t n = bytes.size() / stride;
  buf.samples.resize(n);
  const unsigned char* p = bytes.data();
  if (format == CaptureFormat::cf32le) {
    for (std::size_t i = 0; i < n; ++i, p += 8) buf.samples[i] = {load_f32le(p), load_f32le(p + 4)};
  } else {
    for (std::size_t i = 0; i < n; ++i, p += 2) buf.samples[i] = {dequantize_cu8(p[0]), dequantize_cu8(p[1])};
  }
  return buf;
}

WriteStats write_capture(const IqBuffer& buf, const std::filesystem::path& path, CaptureFormat format) {
  const std::size_t stride = bytes_per_sample(format);
  std::vector<unsigned char> bytes(buf.samples.size() * stride);
  WriteStats st;
  st.samples = buf.samples.size();
  unsigned char* p = bytes.data();
  for (const auto& s : buf.samples) {
    if (format == CaptureFormat::cf32le) {
      store_f32le(s.real(), p);
      store_f32le(s.imag(), p + 4);
      p += 8;
    } else {
      bool ci = false, cq = false;
      p[0] = quantize_cu8(s.real(), ci);
      p[1] = quantize_cu8(s.imag(), cq);
      st.clipped += (ci || cq);
      p += 2;
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CaptureError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw CaptureError("write error on " + path.string());
  return st;
}

}  // namespace ambscatter
