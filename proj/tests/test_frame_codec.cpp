#include <doctest.h>

#include <random>
#include <stdexcept>

#include "ambscatter/frame_codec.hpp"
#include "oracles.hpp"

using namespace ambscatter;

TEST_SUITE("frame_codec") {

TEST_CASE("image serialization is row-major") {
  PixelImage white;
  CHECK(image_to_bits(white) == Bits(88, 0));

  PixelImage corner;
  corner.set(0, 0, true);
  auto b = image_to_bits(corner);
  CHECK(b[0] == 1);
  CHECK(std::count(b.begin(), b.end(), 1) == 1);

  PixelImage checker;
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 11; ++c) checker.set(r, c, (r + c) % 2);
  b = image_to_bits(checker);
  REQUIRE(b.size() == 88);
  // 11 columns: row r starts with r%2, so the 88 bits alternate 0,1,0,1,...
  for (std::size_t k = 0; k < 88; ++k) CHECK(b[k] == k % 2);

  PixelImage one;
  one.set(3, 7, true);
  CHECK(image_to_bits(one)[3 * 11 + 7] == 1);
}

TEST_CASE("build_frame appends the sync word") {
  const auto f = build_frame(Bits(88, 0), Bits(8, 1)).bits();
  REQUIRE(f.size() == 96);
  for (std::size_t i = 0; i < 88; ++i) CHECK(f[i] == 0);
  for (std::size_t i = 88; i < 96; ++i) CHECK(f[i] == 1);

  CHECK_THROWS_AS(build_frame(Bits(87, 0), Bits(8, 1)), std::invalid_argument);
  CHECK_THROWS_AS(build_frame(Bits(88, 0), Bits(7, 1)), std::invalid_argument);
}

TEST_CASE("frame round trip over random images") {
  std::mt19937_64 rng(11);
  const Bits sync(kDefaultSync.begin(), kDefaultSync.end());
  for (int i = 0; i < 100; ++i) {
    const auto img = oracle::random_image(rng);
    const auto [back, s] = parse_frame(frame_from_image(img).bits());
    CHECK(back == img);
    CHECK(s == sync);
    CHECK(PixelImage::from_bits(image_to_bits(img)) == img);
  }
  CHECK_THROWS_AS(parse_frame(Bits(88, 0)), std::invalid_argument);
}

TEST_CASE("fm0 encode examples") {
  CHECK(fm0_encode(Bits{1}, 0).levels == Bits{1, 1});
  CHECK(fm0_encode(Bits{0}, 0).levels == Bits{1, 0});
  const Bits in{1, 0, 1, 1, 0};
  const Bits expect{1, 1, 0, 1, 0, 0, 1, 1, 0, 1};
  CHECK(fm0_encode(in, 0).levels == expect);
  CHECK(oracle::fm0(in, 0) == expect);
  CHECK(fm0_encode(in, 1).levels == oracle::fm0(in, 1));
  CHECK_THROWS_AS(fm0_encode(Bits{}, 0), std::invalid_argument);
}

TEST_CASE("fm0 decode examples") {
  auto d = fm0_decode(Bits{1, 1});
  CHECK(d.bits == Bits{1});
  CHECK(d.violations == 0);
  d = fm0_decode(Bits{1, 0});
  CHECK(d.bits == Bits{0});
  CHECK(d.violations == 0);
  // 1,1 | 1,0 : no inversion at the boundary
  CHECK(fm0_decode(Bits{1, 1, 1, 0}).violations == 1);
  CHECK_THROWS_AS(fm0_decode(Bits{1, 0, 1}), std::invalid_argument);
}

TEST_CASE("switch state mapping") {
  CHECK(switch_state_of(0) == SwitchState::connected);
  CHECK(switch_state_of(1) == SwitchState::disconnected);
  for (std::uint8_t l : {0, 1}) CHECK(level_of(switch_state_of(l)) == l);
  for (auto s : {SwitchState::connected, SwitchState::disconnected}) CHECK(switch_state_of(level_of(s)) == s);
}

TEST_CASE("fm0 properties over random frames") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 1000; ++t) {
    const auto frame = oracle::random_bits(rng, kFrameBits);
    const std::uint8_t init = t % 2;
    const auto lv = fm0_encode(frame, init).levels;
    REQUIRE(lv.size() == 192);
    CHECK(lv == oracle::fm0(frame, init));

    const auto d = fm0_decode(lv);
    CHECK(d.bits == frame);
    CHECK(d.violations == 0);

    Bits comp(lv);
    for (auto& l : comp) l ^= 1;
    const auto dc = fm0_decode(comp);
    CHECK(dc.bits == frame);
    CHECK(dc.violations == 0);

    std::size_t transitions = 0;
    for (std::size_t k = 1; k < kFrameBits; ++k) transitions += lv[2 * k - 1] != lv[2 * k];
    CHECK(transitions == 95);
    CHECK(lv[0] != init);
  }
}

TEST_CASE("repeated frames continue the level chain") {
  std::mt19937_64 rng(9);
  const auto frame = oracle::random_bits(rng, kFrameBits);
  const auto rep = fm0_encode_repeated(frame, 3, 0).levels;
  REQUIRE(rep.size() == 3 * 192);
  Bits three;
  for (int i = 0; i < 3; ++i) three.insert(three.end(), frame.begin(), frame.end());
  CHECK(rep == oracle::fm0(three, 0));
  CHECK(fm0_decode(rep).violations == 0);
}

TEST_CASE("image text format") {
  const std::string text =
      "#..........\n"
      ".#.........\n"
      "..#........\n"
      "...#.......\n"
      "....#......\n"
      ".....#.....\n"
      "......#....\n"
      ".......####\n";
  const auto img = parse_image_text(text);
  CHECK(img.at(0, 0) == 1);
  CHECK(img.at(7, 10) == 1);
  CHECK(img.at(0, 1) == 0);
  CHECK(format_image_text(img) == text);

  CHECK_THROWS_AS(parse_image_text(text.substr(0, 12 * 7)), std::invalid_argument);
  CHECK_THROWS_AS(parse_image_text(text + "...........\n"), std::invalid_argument);
  std::string wide = text;
  wide.insert(11, ".");
  CHECK_THROWS_AS(parse_image_text(wide), std::invalid_argument);
  std::string bad = text;
  bad[3] = 'x';
  CHECK_THROWS_AS(parse_image_text(bad), std::invalid_argument);
  CHECK_THROWS_AS(parse_image_text(text.substr(0, text.size() - 1)), std::invalid_argument);
}

TEST_CASE("hex fixtures") {
  CHECK(bits_to_hex(Bits{1, 0, 1, 1, 1, 0, 0, 0}) == "b8");
  CHECK(hex_to_bits("2e") == Bits{0, 0, 1, 0, 1, 1, 1, 0});
  CHECK(bits_to_hex(Bits{1, 1}) == "c");
  CHECK(hex_to_bits("c", 2) == Bits{1, 1});
  CHECK_THROWS_AS(hex_to_bits("d", 2), std::invalid_argument);
  CHECK_THROWS_AS(hex_to_bits("zz"), std::invalid_argument);
  std::mt19937_64 rng(3);
  for (std::size_t n : {1u, 7u, 88u, 96u, 193u}) {
    const auto b = oracle::random_bits(rng, n);
    CHECK(hex_to_bits(bits_to_hex(b), n) == b);
  }
}

TEST_CASE("default sync word is the search optimum") {
  const auto r = select_sync_pattern();
  CHECK(r.pattern == Bits(kDefaultSync.begin(), kDefaultSync.end()));
  CHECK(r.worst_expected_sidelobe < 1.0);
  CHECK(select_sync_pattern().pattern == r.pattern);
}

}
