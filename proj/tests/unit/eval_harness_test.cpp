#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

#include <ldinav/dataset_io.hpp>
#include <ldinav/eval_harness.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <iterator>

using namespace ldinav;

namespace {
auto small_rig(int views = 4) -> RigSpec {
  RigSpec rig{};
  rig.views = views;
  rig.width = 128;
  rig.height = 96;
  rig.focal = 100.0;
  return rig;
}

auto image(int w, int h, std::uint8_t luma) -> ViewImage {
  ViewImage img{w, h};
  std::fill(img.y.begin(), img.y.end(), luma);
  return img;
}

void expect_monotone(const std::vector<RdPoint> &points) {
  for (std::size_t i = 1; i < points.size(); ++i) {
    EXPECT_LE(points[i].total_bits, points[i - 1].total_bits) << i;
    EXPECT_LE(points[i].mean_psnr, points[i - 1].mean_psnr) << i;
  }
}
} // namespace

TEST(Psnr, IdenticalImagesGiveInfinity) {
  const auto a = image(8, 8, 77);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
}

TEST(Psnr, UnitErrorEverywhere) {
  // MSE = 1 gives 20 log10(255).
  const double expected = 20.0 * std::log10(255.0);
  EXPECT_NEAR(expected, 48.13, 0.01);
  EXPECT_NEAR(psnr(image(16, 9, 100), image(16, 9, 101)), expected, 1e-12);
  auto b = image(16, 9, 100);
  for (std::size_t i = 0; i < b.y.size(); i += 2) {
    b.y.data()[i] = 99;
  }
  for (std::size_t i = 1; i < b.y.size(); i += 2) {
    b.y.data()[i] = 101;
  }
  EXPECT_NEAR(psnr(image(16, 9, 100), b), expected, 1e-12);
}

TEST(Psnr, SymmetricAndLumaOnly) {
  std::mt19937_64 rng{1};
  ViewImage a{20, 10};
  ViewImage b{20, 10};
  for (std::size_t i = 0; i < a.y.size(); ++i) {
    a.y.data()[i] = static_cast<std::uint8_t>(rng());
    b.y.data()[i] = static_cast<std::uint8_t>(rng());
    b.cb.data()[i] = static_cast<std::uint8_t>(rng());
  }
  EXPECT_EQ(psnr(a, b), psnr(b, a));
  auto c = a;
  std::fill(c.cr.begin(), c.cr.end(), 3);
  EXPECT_TRUE(std::isinf(psnr(a, c)));
}

TEST(Psnr, SizeMismatchIsInvalid) {
  EXPECT_THROW(psnr(image(4, 4, 0), image(4, 5, 0)), std::invalid_argument);
}

TEST(Report, OnePointGivesHeaderAndRow) {
  const RdPoint p{Method::Simulcast, 8.0, 1234, 0.125, 41.5, {40.0, 43.0}};
  const auto csv = report_csv({p});
  EXPECT_EQ(csv, "method,quality,total_bits,bpp,mean_psnr,psnr_0,psnr_1\n"
                 "simulcast,8,1234,0.125,41.5,40,43\n");
  EXPECT_THROW(report_csv({}), std::invalid_argument);
}

TEST(Report, CsvRoundTripsExactly) {
  std::mt19937_64 rng{2};
  std::uniform_real_distribution<double> db{20.0, 60.0};
  std::vector<RdPoint> points;
  for (int i = 0; i < 10; ++i) {
    RdPoint p;
    p.method = i % 2 == 0 ? Method::ExtendedLdi : Method::Simulcast;
    p.quality = 0.25 * (i + 1) + 1.0 / 3.0;
    p.total_bits = rng() % 10000000;
    p.bpp = static_cast<double>(p.total_bits) / 196608.0;
    for (int v = 0; v < 15; ++v) {
      p.view_psnr.push_back(db(rng));
    }
    p.mean_psnr = db(rng);
    points.push_back(p);
  }
  EXPECT_EQ(parse_report_csv(report_csv(points)), points);
}

TEST(Report, EmitWritesFile) {
  test::TempDir dir{"report"};
  const RdPoint p{Method::ExtendedLdi, 2.0, 99, 0.01, 50.0, {50.0}};
  const auto file = dir.path() / "nested" / "rd.csv";
  emit_report({p}, file);
  std::ifstream in{file};
  const std::string text{std::istreambuf_iterator<char>{in}, {}};
  EXPECT_EQ(text, report_csv({p}));
  EXPECT_THROW(parse_report_csv("nonsense\n"), std::invalid_argument);
}

TEST(Report, RenderFileNameUsesTwoDecimals) {
  EXPECT_EQ(render_file_name(2.01), "render_2.01.png");
  EXPECT_EQ(render_file_name(3.0), "render_3.00.png");
}

TEST(RateMatching, InterpolatesAndRespectsTolerance) {
  const std::vector<RdPoint> curve{{Method::Simulcast, 2.0, 1000, 0.0, 50.0, {}},
                                   {Method::Simulcast, 8.0, 400, 0.0, 40.0, {}},
                                   {Method::Simulcast, 32.0, 100, 0.0, 30.0, {}}};
  EXPECT_DOUBLE_EQ(*bits_at_psnr(curve, 45.0), 700.0);
  EXPECT_DOUBLE_EQ(*bits_at_psnr(curve, 30.0), 100.0);
  EXPECT_DOUBLE_EQ(*bits_at_psnr(curve, 50.4), 1000.0);
  EXPECT_FALSE(bits_at_psnr(curve, 50.6));
  EXPECT_FALSE(bits_at_psnr(curve, 29.4));
  const std::vector<RdPoint> ldi{{Method::ExtendedLdi, 2.0, 600, 0.0, 45.0, {}},
                                 {Method::ExtendedLdi, 8.0, 800, 0.0, 45.0, {}},
                                 {Method::ExtendedLdi, 32.0, 10, 0.0, 20.0, {}}};
  EXPECT_EQ(count_rate_wins(ldi, curve), 1u);
}

TEST(RdSweep, BothMethodsAreMonotone) {
  const auto rig = small_rig();
  const auto ds = test::make_dataset(layered_scene(31, rig), rig);
  SegmentConfig config;
  const std::vector<double> qs{2.0, 4.0, 8.0, 16.0, 32.0};
  const auto ldi = rd_sweep_ldi(ds, config, qs);
  const auto sim = rd_sweep_simulcast(ds, config, qs);
  ASSERT_EQ(ldi.size(), 5u);
  ASSERT_EQ(sim.size(), 5u);
  expect_monotone(ldi);
  expect_monotone(sim);
  for (const auto &p : ldi) {
    EXPECT_EQ(p.view_psnr.size(), 15u);
    EXPECT_TRUE(std::isfinite(p.mean_psnr));
    EXPECT_GT(p.total_bits, 0u);
    EXPECT_DOUBLE_EQ(p.bpp, static_cast<double>(p.total_bits) / (4.0 * 128.0 * 96.0));
  }
}

TEST(RdSweep, LdiRateIsTheContainerSize) {
  const auto rig = small_rig();
  const auto ds = test::make_dataset(layered_scene(32, rig), rig);
  SegmentConfig config;
  const auto built = build_extended_ldi(ds, 1, config.build);
  const auto seg = encode_segment(built.ldi, {8.0, std::nullopt});
  EXPECT_EQ(rd_sweep_ldi(ds, config, {8.0}).front().total_bits, seg.bytes.size() * 8);
}

TEST(RdSweep, SimulcastRateIsTheSumOfStreams) {
  const auto rig = small_rig(2);
  const auto ds = test::make_dataset(layered_scene(33, rig), rig);
  const CoderQuality q{8.0, std::nullopt};
  std::uint64_t bits = 0;
  for (const auto &v : ds.views) {
    for (const auto *plane : {&v.image.y, &v.image.cb, &v.image.cr}) {
      ComponentImage c{ComponentKind::Y, 0, false, Grid<std::int32_t>{v.image.width(), v.image.height()}};
      std::copy(plane->begin(), plane->end(), c.samples.begin());
      bits += encode_component(c, q).size() * 8;
    }
    ComponentImage d{ComponentKind::D, 0, false, Grid<std::int32_t>{v.image.width(), v.image.height()}};
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
      d.samples.data()[i] = quantize_inverse_depth(v.depth.depth.data()[i], v.camera.z_near,
                                                   v.camera.z_far);
    }
    bits += encode_component(d, q).size() * 8;
  }
  EXPECT_EQ(simulcast_code(ds, q).total_bits, bits);
}

TEST(RdSweep, SegmentOfOriginalsOnly) {
  const auto rig = small_rig();
  const auto ds = test::make_dataset(layered_scene(34, rig), rig);
  SegmentConfig config;
  config.viewpoints = 4;
  const auto truth = segment_ground_truth(ds, config);
  ASSERT_EQ(truth.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(truth[k], ds.views[k].image);
  }
  const auto sim = rd_sweep_simulcast(ds, config, {kFinestQuality});
  EXPECT_EQ(sim.front().view_psnr.size(), 4u);
  config.viewpoints = 3;
  EXPECT_THROW(rd_sweep_ldi(ds, config, {8.0}), std::invalid_argument);
}

TEST(RdSweep, SingleViewRatesAgree) {
  RigSpec rig{};
  rig.views = 1;
  const auto ds = test::make_dataset(layered_scene(35, rig), rig);
  SegmentConfig config;
  config.viewpoints = 1;
  const auto built = build_extended_ldi(ds, 0, config.build);
  for (const double q : {2.0, 8.0, 32.0}) {
    const auto ldi = rd_sweep_ldi(ds, config, {q}).front();
    const auto sim = rd_sweep_simulcast(ds, config, {q}).front();
    const double ratio = static_cast<double>(ldi.total_bits) / static_cast<double>(sim.total_bits);
    EXPECT_NEAR(ratio, 1.0, 0.05) << q;
    // Beyond fixed framing, the component payloads are the simulcast streams.
    const auto seg = encode_segment(built.ldi, {q, std::nullopt});
    std::size_t payload = 0;
    for (const auto &s : seg.streams) {
      if (s.kind != ComponentKind::Nol) {
        payload += s.length;
      }
    }
    EXPECT_EQ(payload * 8, sim.total_bits) << q;
  }
}

TEST(RdSweep, FinestQualityIsHighFidelity) {
  const RigSpec rig{};
  const auto ds = test::make_dataset(layered_scene(36, rig), rig);
  SegmentConfig config;
  const auto point = rd_sweep_ldi(ds, config, {kFinestQuality}).front();
  EXPECT_GE(point.mean_psnr, 40.0);
}

TEST(RdSweep, DumpsRendersPerMethod) {
  test::TempDir dir{"dumps"};
  const auto rig = small_rig();
  const auto ds = test::make_dataset(layered_scene(37, rig), rig);
  SegmentConfig config;
  config.viewpoints = 4;
  config.dump_root = dir.path();
  config.dump_poses = {2.01, 4.0};
  rd_sweep_ldi(ds, config, {8.0});
  rd_sweep_simulcast(ds, config, {8.0});
  for (const char *method : {"extended_ldi", "simulcast"}) {
    for (const char *name : {"render_2.01.png", "render_4.00.png"}) {
      const auto file = dir.path() / method / "q8" / name;
      ASSERT_TRUE(std::filesystem::exists(file)) << file;
      EXPECT_EQ(read_png(file).width, 128);
    }
  }
}
