#include "support/oracles.hpp"

#include <ldinav/errors.hpp>
#include <ldinav/nol_coder.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace ldinav;

namespace {
auto bpp(const std::vector<std::uint8_t> &bits, const Grid<std::uint8_t> &g) -> double {
  return bits.size() * 8.0 / static_cast<double>(g.size());
}
} // namespace

TEST(NolCoder, ConstantGrid) {
  for (const std::uint8_t v : {0, 1, 3}) {
    const Grid<std::uint8_t> g{256, 192, v};
    const auto bits = encode_nol(g);
    EXPECT_EQ(decode_nol(bits, 256, 192), g);
    EXPECT_LT(bpp(bits, g), 0.02) << int{v};
  }
}

TEST(NolCoder, RandomGridsRoundTrip) {
  std::mt19937_64 rng{1};
  for (int i = 0; i < 200; ++i) {
    const int w = 1 + static_cast<int>(rng() % 96);
    const int h = 1 + static_cast<int>(rng() % 96);
    const auto g = test::random_grid(rng, w, h, 3);
    ASSERT_EQ(decode_nol(encode_nol(g), w, h), g) << w << "x" << h;
  }
}

TEST(NolCoder, LargeValuesAndTinyGrids) {
  std::mt19937_64 rng{2};
  for (const int maxValue : {1, 7, 255}) {
    const auto g = test::random_grid(rng, 40, 30, maxValue);
    EXPECT_EQ(decode_nol(encode_nol(g), 40, 30), g);
  }
  const Grid<std::uint8_t> one{1, 1, 2};
  EXPECT_EQ(decode_nol(encode_nol(one), 1, 1), one);
}

TEST(NolCoder, StructuredGridsRoundTrip) {
  Grid<std::uint8_t> stripes{300, 200};
  Grid<std::uint8_t> checker{64, 64};
  Grid<std::uint8_t> blobs{256, 192, 1};
  for (int y = 0; y < 200; ++y) {
    for (int x = 0; x < 300; ++x) {
      stripes(x, y) = static_cast<std::uint8_t>((x / 7) % 4);
    }
  }
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      checker(x, y) = static_cast<std::uint8_t>((x + y) % 2 * 3);
    }
  }
  for (int y = 50; y < 120; ++y) {
    for (int x = 40; x < 90; ++x) {
      blobs(x, y) = 2;
    }
    for (int x = 60; x < 70; ++x) {
      blobs(x, y) = 3;
    }
  }
  for (int x = 0; x < 256; ++x) {
    blobs(x, 0) = 0;
  }
  for (const auto *g : {&stripes, &checker, &blobs}) {
    EXPECT_EQ(decode_nol(encode_nol(*g), g->width(), g->height()), *g);
  }
}

TEST(NolCoder, PiecewiseConstantBeatsNoise) {
  std::mt19937_64 rng{3};
  Grid<std::uint8_t> regions{128, 128, 1};
  for (int y = 0; y < 128; ++y) {
    for (int x = 64; x < 128; ++x) {
      regions(x, y) = 2;
    }
  }
  const auto noise = test::random_grid(rng, 128, 128, 3);
  EXPECT_LT(encode_nol(regions).size(), encode_nol(noise).size());
}

TEST(NolCoder, TruncatedStreamIsDecodeError) {
  std::mt19937_64 rng{4};
  const auto g = test::random_grid(rng, 64, 64, 3);
  auto bits = encode_nol(g);
  bits.resize(bits.size() / 3);
  EXPECT_THROW(decode_nol(bits, 64, 64), DecodeError);
  EXPECT_THROW(decode_nol({}, 64, 64), DecodeError);
}
