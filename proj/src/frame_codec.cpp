#include "ambscatter/frame_codec.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <tuple>

namespace ambscatter {

namespace {

void require_binary(std::span<const std::uint8_t> bits, const char* what) {
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) {
      throw std::invalid_argument(std::string(what) + ": value at index " + std::to_string(i) +
                                  " is not 0 or 1");
    }
  }
}

}  // namespace

PixelImage::PixelImage(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), pixels_(rows * cols, 0) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("image dimensions must be nonzero");
}

PixelImage PixelImage::from_bits(std::span<const std::uint8_t> bits, std::size_t rows,
                                 std::size_t cols) {
  PixelImage img(rows, cols);
  if (bits.size() != img.size()) {
    throw std::invalid_argument("image needs " + std::to_string(img.size()) + " bits, got " +
                                std::to_string(bits.size()));
  }
  require_binary(bits, "image");
  std::copy(bits.begin(), bits.end(), img.pixels_.begin());
  return img;
}

std::uint8_t PixelImage::at(std::size_t row, std::size_t col) const {
  if (row >= rows_ || col >= cols_) throw std::out_of_range("pixel index out of range");
  return pixels_[row * cols_ + col];
}

void PixelImage::set(std::size_t row, std::size_t col, bool black) {
  if (row >= rows_ || col >= cols_) throw std::out_of_range("pixel index out of range");
  pixels_[row * cols_ + col] = black ? 1 : 0;
}

Bits FrameBits::bits() const {
  Bits out(payload);
  out.insert(out.end(), sync.begin(), sync.end());
  return out;
}

Bits image_to_bits(const PixelImage& img) {
  return Bits(img.pixels().begin(), img.pixels().end());
}

FrameBits build_frame(std::span<const std::uint8_t> payload, std::span<const std::uint8_t> sync,
                      std::size_t payload_bits, std::size_t sync_bits) {
  if (payload.size() != payload_bits) {
    throw std::invalid_argument("payload must be " + std::to_string(payload_bits) +
                                " bits, got " + std::to_string(payload.size()));
  }
  if (sync.size() != sync_bits) {
    throw std::invalid_argument("sync must be " + std::to_string(sync_bits) + " bits, got " +
                                std::to_string(sync.size()));
  }
  require_binary(payload, "payload");
  require_binary(sync, "sync");
  return FrameBits{Bits(payload.begin(), payload.end()), Bits(sync.begin(), sync.end())};
}

FrameBits frame_from_image(const PixelImage& img, std::span<const std::uint8_t> sync) {
  return build_frame(image_to_bits(img), sync, img.size(), sync.size());
}

std::pair<PixelImage, Bits> parse_frame(std::span<const std::uint8_t> frame, std::size_t rows,
                                        std::size_t cols) {
  const std::size_t n = rows * cols;
  if (frame.size() <= n) {
    throw std::invalid_argument("frame of " + std::to_string(frame.size()) +
                                " bits has no room for a sync word after " + std::to_string(n) +
                                " payload bits");
  }
  return {PixelImage::from_bits(frame.first(n), rows, cols), Bits(frame.begin() + n, frame.end())};
}

Fm0Levels fm0_encode(std::span<const std::uint8_t> bits, std::uint8_t initial_level) {
  if (bits.empty()) throw std::invalid_argument("fm0_encode: empty bit sequence");
  require_binary(bits, "fm0_encode");
  if (initial_level > 1) throw std::invalid_argument("fm0_encode: initial level must be 0 or 1");

  Fm0Levels out;
  out.initial_level = initial_level;
  out.levels.reserve(2 * bits.size());
  std::uint8_t level = initial_level;
  for (auto b : bits) {
    level ^= 1;  // boundary
    out.levels.push_back(level);
    if (b == 0) level ^= 1;  // mid-bit
    out.levels.push_back(level);
  }
  return out;
}

Fm0Levels fm0_encode_repeated(std::span<const std::uint8_t> frame, std::size_t repetitions,
                              std::uint8_t initial_level) {
  if (repetitions == 0) throw std::invalid_argument("fm0_encode_repeated: zero repetitions");
  Bits all;
  all.reserve(frame.size() * repetitions);
  for (std::size_t r = 0; r < repetitions; ++r) all.insert(all.end(), frame.begin(), frame.end());
  return fm0_encode(all, initial_level);
}

Fm0Decoded fm0_decode(std::span<const std::uint8_t> levels) {
  if (levels.size() % 2 != 0) {
    throw std::invalid_argument("fm0_decode: odd level count " + std::to_string(levels.size()));
  }
  Fm0Decoded out;
  out.bits.reserve(levels.size() / 2);
  for (std::size_t k = 0; k < levels.size(); k += 2) {
    out.bits.push_back(levels[k] == levels[k + 1] ? 1 : 0);
    if (k > 0 && levels[k - 1] == levels[k]) ++out.violations;
  }
  return out;
}

const char* to_string(SwitchState s) {
  return s == SwitchState::connected ? "connected" : "disconnected";
}

PixelImage parse_image_text(std::string_view text, std::size_t rows, std::size_t cols) {
  PixelImage img(rows, cols);
  std::size_t pos = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) {
      throw std::invalid_argument("image text: line " + std::to_string(r + 1) +
                                  " missing or not newline-terminated");
    }
    auto line = text.substr(pos, eol - pos);
    if (line.size() != cols) {
      throw std::invalid_argument("image text: line " + std::to_string(r + 1) + " has " +
                                  std::to_string(line.size()) + " characters, expected " +
                                  std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (line[c] == '#') {
        img.set(r, c, true);
      } else if (line[c] != '.') {
        throw std::invalid_argument("image text: bad character '" + std::string(1, line[c]) +
                                    "' at line " + std::to_string(r + 1));
      }
    }
    pos = eol + 1;
  }
  if (pos != text.size()) throw std::invalid_argument("image text: trailing content after image");
  return img;
}

std::string format_image_text(const PixelImage& img) {
  std::string out;
  out.reserve(img.rows() * (img.cols() + 1));
  for (std::size_t r = 0; r < img.rows(); ++r) {
    for (std::size_t c = 0; c < img.cols(); ++c) out.push_back(img.at(r, c) ? '#' : '.');
    out.push_back('\n');
  }
  return out;
}

std::string bits_to_hex(std::span<const std::uint8_t> bits) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    unsigned nibble = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      nibble <<= 1;
      if (i + j < bits.size()) nibble |= bits[i + j] & 1u;
    }
    out.push_back(digits[nibble]);
  }
  return out;
}

Bits hex_to_bits(std::string_view hex, std::size_t nbits) {
  if (nbits > 4 * hex.size() || nbits + 4 <= 4 * hex.size()) {
    throw std::invalid_argument("hex string of " + std::to_string(hex.size()) +
                                " digits cannot hold exactly " + std::to_string(nbits) + " bits");
  }
  Bits out;
  out.reserve(4 * hex.size());
  for (char ch : hex) {
    unsigned v;
    if (ch >= '0' && ch <= '9') {
      v = static_cast<unsigned>(ch - '0');
    } else if (ch >= 'a' && ch <= 'f') {
      v = static_cast<unsigned>(ch - 'a' + 10);
    } else if (ch >= 'A' && ch <= 'F') {
      v = static_cast<unsigned>(ch - 'A' + 10);
    } else {
      throw std::invalid_argument("bad hex digit '" + std::string(1, ch) + "'");
    }
    for (int s = 3; s >= 0; --s) out.push_back(static_cast<std::uint8_t>((v >> s) & 1u));
  }
  for (std::size_t i = nbits; i < out.size(); ++i) {
    if (out[i]) throw std::invalid_argument("nonzero padding bits in hex string");
  }
  out.resize(nbits);
  return out;
}

Bits hex_to_bits(std::string_view hex) { return hex_to_bits(hex, 4 * hex.size()); }

SyncSearchResult select_sync_pattern(std::uint64_t seed, std::size_t frames) {
  if (frames == 0) throw std::invalid_argument("select_sync_pattern: zero frames");

  std::mt19937_64 rng(seed);
  std::vector<Bits> payloads(frames, Bits(kPayloadBits));
  for (auto& p : payloads)
    for (auto& b : p) b = static_cast<std::uint8_t>(rng() >> 63);

  SyncSearchResult best;
  auto best_key = std::make_tuple(2.0, 2.0, 256u);
  Bits frame(kFrameBits);
  for (unsigned word = 0; word < 256; ++word) {
    Bits sync(kSyncBits);
    for (std::size_t i = 0; i < kSyncBits; ++i) sync[i] = (word >> (kSyncBits - 1 - i)) & 1u;

    std::vector<double> lag_sum(kFrameBits, 0.0);
    double worst_sum = 0.0;
    for (const auto& p : payloads) {
      std::copy(p.begin(), p.end(), frame.begin());
      std::copy(sync.begin(), sync.end(), frame.begin() + kPayloadBits);
      std::size_t worst = 0;
      for (std::size_t lag = 1; lag < kFrameBits; ++lag) {
        std::size_t matches = 0;
        for (std::size_t i = 0; i < kSyncBits; ++i)
          matches += frame[(kPayloadBits + lag + i) % kFrameBits] == sync[i];
        lag_sum[lag] += static_cast<double>(matches);
        worst = std::max(worst, matches);
      }
      worst_sum += static_cast<double>(worst);
    }
    const double norm = static_cast<double>(frames * kSyncBits);
    const double worst_expected = *std::max_element(lag_sum.begin(), lag_sum.end()) / norm;
    const double expected_worst = worst_sum / norm;
    auto key = std::make_tuple(worst_expected, expected_worst, word);
    if (key < best_key) {
      best_key = key;
      best = SyncSearchResult{sync, worst_expected, expected_worst};
    }
  }
  return best;
}

}  // namespace ambscatter
