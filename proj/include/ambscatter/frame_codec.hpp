#pragma once

// Tag message layout: a black/white pixel image serialized row-major, an
// 8-bit sync word appended, and the whole frame FM0 line-coded into
// half-symbol switch levels.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ambscatter {

using Bits = std::vector<std::uint8_t>;

inline constexpr std::size_t kImageRows = 8;
inline constexpr std::size_t kImageCols = 11;
inline constexpr std::size_t kPayloadBits = kImageRows * kImageCols;  // 88
inline constexpr std::size_t kSyncBits = 8;
inline constexpr std::size_t kFrameBits = kPayloadBits + kSyncBits;  // 96
inline constexpr std::size_t kFrameLevels = 2 * kFrameBits;           // 192

/// Default sync word (0x2E = 0010 1110), chosen by select_sync_pattern()
/// with the default search arguments.
inline constexpr std::array<std::uint8_t, kSyncBits> kDefaultSync = {0, 0, 1, 0, 1, 1, 1, 0};

class PixelImage {
 public:
  PixelImage() : PixelImage(kImageRows, kImageCols) {}
  PixelImage(std::size_t rows, std::size_t cols);

  /// Row-major inverse of image_to_bits(). Throws std::invalid_argument on a
  /// size mismatch or a value outside {0, 1}.
  static PixelImage from_bits(std::span<const std::uint8_t> bits,
                              std::size_t rows = kImageRows,
                              std::size_t cols = kImageCols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return pixels_.size(); }

  std::uint8_t at(std::size_t row, std::size_t col) const;
  void set(std::size_t row, std::size_t col, bool black);

  std::span<const std::uint8_t> pixels() const { return pixels_; }

  friend bool operator==(const PixelImage&, const PixelImage&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint8_t> pixels_;  // 1 = black
};

struct FrameBits {
  Bits payload;
  Bits sync;

  /// [payload | sync]
  Bits bits() const;
};

struct Fm0Levels {
  Bits levels;
  std::uint8_t initial_level = 0;  // level held before the first half-symbol
};

struct Fm0Decoded {
  Bits bits;
  std::size_t violations = 0;  // bit boundaries missing the mandatory transition
};

enum class SwitchState { connected, disconnected };

Bits image_to_bits(const PixelImage& img);

/// Throws std::invalid_argument when payload/sync lengths differ from the
/// expected ones.
FrameBits build_frame(std::span<const std::uint8_t> payload, std::span<const std::uint8_t> sync,
                      std::size_t payload_bits = kPayloadBits,
                      std::size_t sync_bits = kSyncBits);

FrameBits frame_from_image(const PixelImage& img,
                           std::span<const std::uint8_t> sync = kDefaultSync);

/// Splits [payload | sync] back into the image and the sync word.
std::pair<PixelImage, Bits> parse_frame(std::span<const std::uint8_t> frame,
                                        std::size_t rows = kImageRows,
                                        std::size_t cols = kImageCols);

/// FM0 (bi-phase space): the level inverts at every bit boundary; a data 0
/// adds a mid-bit inversion, a data 1 holds. Two levels per bit.
Fm0Levels fm0_encode(std::span<const std::uint8_t> bits, std::uint8_t initial_level = 0);

/// Encodes `repetitions` back-to-back copies of `frame`; the level chain runs
/// across frame joins.
Fm0Levels fm0_encode_repeated(std::span<const std::uint8_t> frame, std::size_t repetitions,
                              std::uint8_t initial_level = 0);

/// bit k = 1 iff both half-symbols of bit k are equal. Throws on odd length.
Fm0Decoded fm0_decode(std::span<const std::uint8_t> levels);

constexpr SwitchState switch_state_of(std::uint8_t level) {
  return level == 0 ? SwitchState::connected : SwitchState::disconnected;
}

constexpr std::uint8_t level_of(SwitchState s) {
  return s == SwitchState::connected ? 0 : 1;
}

const char* to_string(SwitchState s);

// Text image format: `rows` lines of `cols` characters, '#' black, '.' white,
// each line newline-terminated.
PixelImage parse_image_text(std::string_view text, std::size_t rows = kImageRows,
                            std::size_t cols = kImageCols);
std::string format_image_text(const PixelImage& img);

// Hex fixtures, MSB first within each nibble. A trailing partial nibble is
// zero padded; hex_to_bits() rejects nonzero padding.
std::string bits_to_hex(std::span<const std::uint8_t> bits);
Bits hex_to_bits(std::string_view hex, std::size_t nbits);
Bits hex_to_bits(std::string_view hex);

struct SyncSearchResult {
  Bits pattern;
  double worst_expected_sidelobe = 0.0;  // max over lags of E[matches/8]
  double expected_worst_sidelobe = 0.0;  // E over frames of max-lag matches/8
};

/// Exhaustive search over all 2^8 sync words. Each candidate is appended to
/// `frames` random payloads; every nonzero cyclic shift of the frame is
/// correlated against the word. Ranked by worst expected sidelobe, then by
/// expected worst sidelobe, then by numeric value.
SyncSearchResult select_sync_pattern(std::uint64_t seed = 0, std::size_t frames = 256);

}  // namespace ambscatter
