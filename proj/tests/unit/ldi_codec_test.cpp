#include <ldinav/ldi_codec.hpp>

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <utility>

using namespace ldinav;

namespace {
auto grid_from(int w, int h, std::initializer_list<int> values) -> Grid<std::uint8_t> {
  Grid<std::uint8_t> g{w, h};
  std::size_t i = 0;
  for (const int v : values) {
    g.data()[i++] = static_cast<std::uint8_t>(v);
  }
  return g;
}

auto plane(int w, int h, std::initializer_list<int> values, ComponentKind kind = ComponentKind::Y)
    -> ComponentImage {
  ComponentImage c{kind, 1, false, Grid<std::int32_t>{w, h}};
  std::size_t i = 0;
  for (const int v : values) {
    c.samples.data()[i++] = v;
  }
  return c;
}

auto random_plane(std::mt19937_64 &rng, int w, int h) -> ComponentImage {
  ComponentImage c{ComponentKind::Cb, 1, false, Grid<std::int32_t>{w, h}};
  for (auto &v : c.samples) {
    v = static_cast<std::int32_t>(rng() % 256);
  }
  return c;
}

auto random_mask(std::mt19937_64 &rng, int w, int h, int percent) -> LayerMask {
  LayerMask m{1, Grid<std::uint8_t>{w, h}};
  for (auto &b : m.bits) {
    b = static_cast<int>(rng() % 100) < percent ? 1 : 0;
  }
  return m;
}
} // namespace

TEST(LayerMask, ThresholdsLayerCount) {
  const auto nol = grid_from(4, 1, {0, 1, 2, 3});
  EXPECT_EQ(layer_mask(nol, 0).bits, grid_from(4, 1, {0, 1, 1, 1}));
  EXPECT_EQ(layer_mask(nol, 1).bits, grid_from(4, 1, {0, 0, 1, 1}));
  EXPECT_EQ(layer_mask(nol, 2).bits, grid_from(4, 1, {0, 0, 0, 1}));
  EXPECT_EQ(layer_mask(nol, 3).bits, grid_from(4, 1, {0, 0, 0, 0}));
  EXPECT_EQ(layer_mask(nol, 1).layer, 1);
  EXPECT_THROW(layer_mask(nol, -1), std::invalid_argument);
}

TEST(LayerMask, MatchesDefinitionOnRandomGrids) {
  std::mt19937_64 rng{1};
  Grid<std::uint8_t> nol{33, 17};
  for (auto &n : nol) {
    n = static_cast<std::uint8_t>(rng() % 5);
  }
  for (int l = 0; l < 5; ++l) {
    const auto m = layer_mask(nol, l);
    for (std::size_t i = 0; i < nol.size(); ++i) {
      ASSERT_EQ(m.bits.data()[i], nol.data()[i] > l ? 1 : 0);
    }
  }
}

TEST(LayerFill, SelectsPerPixel) {
  const auto comp = plane(3, 1, {10, 20, 30});
  const auto base = plane(3, 1, {1, 2, 3});
  EXPECT_EQ(layer_fill(comp, base, {1, grid_from(3, 1, {1, 1, 1})}).samples, comp.samples);
  EXPECT_EQ(layer_fill(comp, base, {1, grid_from(3, 1, {0, 0, 0})}).samples, base.samples);
  EXPECT_EQ(layer_fill(comp, base, {1, grid_from(3, 1, {1, 0, 1})}).samples,
            plane(3, 1, {10, 2, 30}).samples);
  EXPECT_THROW(layer_fill(comp, plane(2, 1, {0, 0}), {1, grid_from(3, 1, {1, 0, 1})}),
               std::invalid_argument);
}

TEST(LayerFill, StripInvertsFillOnRandomPlanes) {
  std::mt19937_64 rng{2};
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 40);
    const int h = 1 + static_cast<int>(rng() % 40);
    const auto mask = random_mask(rng, w, h, static_cast<int>(rng() % 101));
    const auto comp = strip_masked(random_plane(rng, w, h), mask);
    const auto base = random_plane(rng, w, h);
    ASSERT_EQ(strip_masked(layer_fill(comp, base, mask), mask), comp);
    ASSERT_EQ(strip_masked(fill_uncovered(comp, mask), mask), comp);
  }
}

TEST(FillUncovered, ReplicatesNearestAlongRows) {
  const auto comp = plane(5, 1, {0, 50, 0, 0, 90});
  const auto out = fill_uncovered(comp, {1, grid_from(5, 1, {0, 1, 0, 0, 1})});
  EXPECT_EQ(out.samples, plane(5, 1, {50, 50, 50, 50, 90}).samples);
}

TEST(FillUncovered, EmptyRowsCopyNeighbourRows) {
  const auto comp = plane(2, 3, {0, 0, 7, 9, 0, 0});
  const auto out = fill_uncovered(comp, {1, grid_from(2, 3, {0, 0, 1, 1, 0, 0})});
  EXPECT_EQ(out.samples, plane(2, 3, {7, 9, 7, 9, 7, 9}).samples);
}

TEST(FillUncovered, BlankPlaneBecomesMidGrey) {
  const auto comp = plane(2, 2, {5, 5, 5, 5});
  const auto mask = LayerMask{1, grid_from(2, 2, {0, 0, 0, 0})};
  EXPECT_EQ(fill_uncovered(comp, mask).samples, plane(2, 2, {128, 128, 128, 128}).samples);
  auto depth = comp;
  depth.kind = ComponentKind::D;
  EXPECT_EQ(fill_uncovered(depth, mask).samples.data()[0], 32768);
}

TEST(Aggregate, PacksMaskedSamplesLeft) {
  const auto comp = plane(8, 1, {0, 0, 0, 3, 0, 0, 0, 7});
  const auto mask = LayerMask{1, grid_from(8, 1, {0, 0, 0, 1, 0, 0, 0, 1})};
  const auto agg = aggregate_rows(comp, mask);
  EXPECT_EQ(agg.counts, std::vector<int>{2});
  EXPECT_EQ(agg.image.samples(0, 0), 3);
  EXPECT_EQ(agg.image.samples(1, 0), 7);
  EXPECT_EQ(deaggregate_rows(agg.image, mask), comp);
}

TEST(Aggregate, RoundTripsOnRandomPlanes) {
  std::mt19937_64 rng{3};
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 40);
    const int h = 1 + static_cast<int>(rng() % 40);
    const auto mask = random_mask(rng, w, h, static_cast<int>(rng() % 101));
    const auto comp = strip_masked(random_plane(rng, w, h), mask);
    const auto agg = aggregate_rows(comp, mask);
    for (int y = 0; y < h; ++y) {
      int n = 0;
      for (int x = 0; x < w; ++x) {
        n += mask.bits(x, y);
      }
      ASSERT_EQ(agg.counts[static_cast<std::size_t>(y)], n);
    }
    ASSERT_EQ(deaggregate_rows(agg.image, mask), comp);
  }
}

namespace {
// Plane a re-encoder derives from `plane` under `ties`.
auto derive(const SampleTies &ties, const Grid<std::int32_t> &plane) -> Grid<std::int32_t> {
  Grid<std::int32_t> out = plane;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::int32_t s = ties.source.data()[i];
    out.data()[i] = s < 0 ? ties.fixed.data()[i] : plane.data()[static_cast<std::size_t>(s)];
  }
  return out;
}

auto sources_are_free(const SampleTies &ties) -> bool {
  for (std::size_t i = 0; i < ties.source.size(); ++i) {
    const std::int32_t s = ties.source.data()[i];
    if (s >= 0 && ties.source.data()[static_cast<std::size_t>(s)] != s) {
      return false;
    }
  }
  return true;
}

auto smooth_plane(int w, int h, ComponentKind kind, int layer) -> ComponentImage {
  ComponentImage c{kind, layer, false, Grid<std::int32_t>{w, h}};
  const double hi = max_sample(kind);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = 0.5 + 0.3 * std::sin(x / 5.0) * std::cos(y / 7.0) + (x > w / 2 ? 0.1 : 0.0);
      c.samples(x, y) = static_cast<std::int32_t>(std::lround(v * hi));
    }
  }
  return c;
}

// Square blobs, so masks have the sparse runs of real layers.
auto blob_mask(std::mt19937_64 &rng, int w, int h, int blobs) -> LayerMask {
  LayerMask m{1, Grid<std::uint8_t>{w, h, 0}};
  for (int b = 0; b < blobs; ++b) {
    const int x0 = static_cast<int>(rng() % static_cast<std::uint64_t>(w));
    const int y0 = static_cast<int>(rng() % static_cast<std::uint64_t>(h));
    const int size = 2 + static_cast<int>(rng() % 9);
    for (int y = y0; y < std::min(h, y0 + size); ++y) {
      for (int x = x0; x < std::min(w, x0 + size); ++x) {
        m.bits(x, y) = 1;
      }
    }
  }
  return m;
}
} // namespace

TEST(SampleTies, FillTiesReproduceFillUncovered) {
  std::mt19937_64 rng{11};
  for (int trial = 0; trial < 40; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 30);
    const int h = 1 + static_cast<int>(rng() % 30);
    const auto mask = random_mask(rng, w, h, static_cast<int>(rng() % 60));
    const auto comp = strip_masked(random_plane(rng, w, h), mask);
    const auto ties = fill_ties(mask, comp.kind);
    ASSERT_TRUE(sources_are_free(ties));
    ASSERT_EQ(derive(ties, comp.samples), fill_uncovered(comp, mask).samples) << trial;
  }
  const auto empty = fill_ties(LayerMask{0, grid_from(2, 1, {0, 0})}, ComponentKind::D);
  EXPECT_EQ(derive(empty, Grid<std::int32_t>{2, 1, 5}), (Grid<std::int32_t>{2, 1, 32768}));
}

TEST(SampleTies, AggregateTiesReproduceRowPadding) {
  std::mt19937_64 rng{12};
  for (int trial = 0; trial < 40; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 30);
    const int h = 1 + static_cast<int>(rng() % 30);
    const auto mask = random_mask(rng, w, h, static_cast<int>(rng() % 101));
    const auto agg = aggregate_rows(random_plane(rng, w, h), mask);
    const auto ties = aggregate_ties(mask, agg.image.kind);
    ASSERT_TRUE(sources_are_free(ties));
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        ASSERT_EQ(ties.source(x, y) == y * w + x, x < agg.counts[static_cast<std::size_t>(y)]);
      }
    }
    ASSERT_EQ(derive(ties, agg.image.samples), agg.image.samples) << trial;
  }
}

TEST(SampleTies, ResidualTiesZeroTheUnmaskedAndBoundTheSum) {
  std::mt19937_64 rng{13};
  const int w = 23;
  const int h = 17;
  const auto mask = random_mask(rng, w, h, 40);
  const auto base = random_plane(rng, w, h);
  const auto ties = residual_ties(mask, base);
  ASSERT_TRUE(sources_are_free(ties));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.bits(x, y) == 0) {
        EXPECT_EQ(ties.source(x, y), -1);
        EXPECT_EQ(ties.fixed(x, y), 0);
      } else {
        EXPECT_EQ(ties.source(x, y), y * w + x);
        EXPECT_EQ(ties.lower(x, y) + base.samples(x, y), 0);
        EXPECT_EQ(ties.upper(x, y) + base.samples(x, y), 255);
      }
    }
  }
}

// A block the decoder cannot bring back into its cells is coded with neighbouring levels on the
// next pass. Repeating the pass must reach planes whose decode is stable, within as many passes
// as a segment encode allows.
TEST(SampleTies, TiedCodingSettles) {
  constexpr int kPasses = 32;
  std::mt19937_64 rng{14};
  const int w = 61;
  const int h = 45;
  std::string unsettled;
  for (const auto kind : {ComponentKind::Y, ComponentKind::D}) {
    for (int trial = 0; trial < 4; ++trial) {
      const auto mask = blob_mask(rng, w, h, 6 + 6 * trial);
      const auto comp = strip_masked(smooth_plane(w, h, kind, 0), mask);
      const auto agg = aggregate_rows(comp, mask);
      const std::array<std::pair<ComponentImage, SampleTies>, 2> planes{
          std::pair{fill_uncovered(comp, mask), fill_ties(mask, kind)},
          std::pair{agg.image, aggregate_ties(mask, kind)}};
      for (std::size_t mode = 0; mode < planes.size(); ++mode) {
        const auto &[input, ties] = planes[mode];
        ASSERT_EQ(derive(ties, input.samples), input.samples);
        for (const double q : {1.5, 3.0, 8.0, 24.0}) {
          auto bits = encode_component(input, {q, std::nullopt});
          bool settled = false;
          for (int pass = 0; pass < kPasses && !settled; ++pass) {
            const auto decoded =
                decode_component(bits, kind, 0, w, h, {q, std::nullopt}, false, 0, &ties);
            ASSERT_EQ(derive(ties, decoded.samples), decoded.samples);
            auto next = encode_component(decoded, {q, std::nullopt});
            settled = next == bits;
            bits = std::move(next);
          }
          if (!settled) {
            unsettled += " kind " + std::to_string(static_cast<int>(kind)) + " trial " +
                         std::to_string(trial) + (mode == 0 ? " fill" : " aggregate") + " q " +
                         std::to_string(q);
          }
        }
      }
    }
  }
  EXPECT_TRUE(unsettled.empty()) << "still changing after " << kPasses << " passes:" << unsettled;
}
