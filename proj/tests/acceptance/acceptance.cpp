// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "support/oracles.hpp"

#include <ldinav/eval_harness.hpp>
#include <ldinav/nol_coder.hpp>
#include <ldinav/segment_container.hpp>
#include <ldinav/synthesis.hpp>

#include <Eigen/Geometry>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace ldinav;

namespace {

struct Outcome {
  bool pass{false};
  std::string detail;
};

auto fmt(double v, int precision = 3) -> std::string {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

auto seconds_since(std::chrono::steady_clock::time_point start) -> double {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

auto reference_of(const RigSpec &rig) -> std::size_t {
  return static_cast<std::size_t>((rig.views - 1) / 2);
}

// Small yaw, pitch and offset jitter around the linear rig.
auto jittered_rig(std::mt19937_64 &rng, const RigSpec &rig) -> std::vector<CameraParams> {
  std::uniform_real_distribution<double> unit{-1.0, 1.0};
  auto cams = linear_rig(rig);
  for (auto &cam : cams) {
    const Vec3 center = cam.center() + Vec3{0.01 * unit(rng), 0.02 * unit(rng), 0.02 * unit(rng)};
    cam.R = (Eigen::AngleAxisd{0.03 * unit(rng), Vec3::UnitY()} *
             Eigen::AngleAxisd{0.02 * unit(rng), Vec3::UnitX()})
                .toRotationMatrix();
    cam.t = -cam.R * center;
  }
  return cams;
}

auto geometry_suite() -> Outcome {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng{1};
  std::uniform_real_distribution<double> unit{-1.0, 1.0};
  double roundTrip = 0.0;
  double composition = 0.0;
  bool endpoints = true;
  for (int i = 0; i < 2000; ++i) {
    const auto a = test::random_camera(rng);
    const auto b = test::random_camera(rng);
    const auto c = test::random_camera(rng);
    const PixelCoord px{128.0 + 120.0 * unit(rng), 96.0 + 90.0 * unit(rng), 3.0 + 2.0 * unit(rng)};
    const Point3 p = unproject(a, px);
    if (const auto back = project(a, p)) {
      roundTrip = std::max({roundTrip, std::abs(back->u - px.u), std::abs(back->v - px.v),
                            std::abs(back->depth - px.depth)});
      roundTrip = std::max(roundTrip, (unproject(a, *back) - p).norm());
    }
    const auto ab = warp_pixel(a, b, px);
    const auto ac = warp_pixel(a, c, px);
    if (ab && ac) {
      if (const auto abc = warp_pixel(b, c, *ab)) {
        composition = std::max({composition, std::abs(abc->u - ac->u), std::abs(abc->v - ac->v)});
      }
    }
    endpoints = endpoints && interpolate_cameras(a, b, 0.0) == a &&
                interpolate_cameras(a, b, 1.0) == b;
  }
  const double elapsed = seconds_since(start);
  return {roundTrip <= 1e-9 && composition <= 1e-6 && endpoints && elapsed < 5.0,
          "round trip " + fmt(roundTrip) + ", composition " + fmt(composition) +
              " px, endpoints " + (endpoints ? "exact" : "inexact") + ", " + fmt(elapsed) + " s"};
}

auto extended_bounds() -> Outcome {
  const RigSpec rig{};
  std::mt19937_64 rng{2};
  std::size_t samples = 0;
  std::size_t outside = 0;
  std::size_t extendedSides = 0;
  std::size_t notMinimal = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto ds = generate_synthetic_scene(layered_scene(seed, rig), jittered_rig(rng, rig));
    const auto &ref = ds.views[reference_of(rig)].camera;
    const auto bounds = compute_extended_bounds(ref, ds);
    const auto adjusted = adjust_reference_camera(ref, bounds);
    // Samples on each outermost row or column of the canvas.
    std::array<std::size_t, 4> onEdge{};
    for (const auto &view : ds.views) {
      const Warper warp{view.camera, adjusted};
      for (int y = 0; y < view.depth.height(); ++y) {
        for (int x = 0; x < view.depth.width(); ++x) {
          if (view.depth.valid(x, y) == 0) {
            continue;
          }
          const auto px = warp(x, y, view.depth.depth(x, y));
          if (!px) {
            continue;
          }
          ++samples;
          const int cx = to_cell(px->u);
          const int cy = to_cell(px->v);
          if (cx < 0 || cy < 0 || cx >= bounds.ext_width || cy >= bounds.ext_height) {
            ++outside;
            continue;
          }
          onEdge[0] += cx == 0;
          onEdge[1] += cx == bounds.ext_width - 1;
          onEdge[2] += cy == 0;
          onEdge[3] += cy == bounds.ext_height - 1;
        }
      }
    }
    const std::array<bool, 4> extended{bounds.origin_dx > 0,
                                       bounds.ext_width - bounds.origin_dx > ref.width,
                                       bounds.origin_dy > 0,
                                       bounds.ext_height - bounds.origin_dy > ref.height};
    for (std::size_t side = 0; side < 4; ++side) {
      if (extended[side]) {
        ++extendedSides;
        // Shrinking this side by one cell must lose a sample.
        notMinimal += onEdge[side] == 0;
      }
    }
  }
  return {outside == 0 && notMinimal == 0 && extendedSides > 0,
          std::to_string(samples) + " samples, " + std::to_string(outside) + " outside, " +
              std::to_string(extendedSides) + " extended sides, " + std::to_string(notMinimal) +
              " not minimal"};
}

auto once_and_only_once() -> Outcome {
  const RigSpec rig{};
  std::vector<SceneSpec> scenes{test::two_plane_scene(rig), test::three_plane_scene(rig)};
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    scenes.push_back(layered_scene(seed, rig));
  }
  double worst = 0.0;
  for (const auto &scene : scenes) {
    const auto ds = test::make_dataset(scene, rig);
    const auto ldi = build_extended_ldi(ds, reference_of(rig)).ldi;
    const auto oracle = test::visible_surface_cells(scene, linear_rig(rig), ldi.ref_cam, 3);
    const double diff = std::abs(static_cast<double>(ldi.pixel_count()) -
                                 static_cast<double>(oracle.total)) /
                        static_cast<double>(oracle.total);
    worst = std::max(worst, diff);
  }
  return {worst <= 0.01, std::to_string(scenes.size()) + " scenes, worst deviation " +
                             fmt(100.0 * worst) + "%"};
}

auto masks_match(const Grid<std::uint8_t> &nol, const ExtendedLdi &ldi, int layers) -> bool {
  for (int l = 0; l < layers; ++l) {
    const auto mask = layer_mask(ldi.nol, l);
    for (int y = 0; y < nol.height(); ++y) {
      for (int x = 0; x < nol.width(); ++x) {
        const bool expected = nol(x, y) > l;
        if ((mask.bits(x, y) != 0) != expected || ldi.has(l, x, y) != expected) {
          return false;
        }
      }
    }
  }
  return true;
}

auto layer_masks() -> Outcome {
  const RigSpec rig{};
  std::vector<ExtendedLdi> ldis;
  for (const auto &scene : {test::two_plane_scene(rig), test::three_plane_scene(rig),
                            layered_scene(3, rig), layered_scene(4, rig)}) {
    ldis.push_back(build_extended_ldi(test::make_dataset(scene, rig), reference_of(rig)).ldi);
  }
  const std::vector<double> qualities{kFinestQuality, 1.0, 2.0, 4.0, 8.0, 16.0,
                                      32.0, 128.0, 512.0, kCoarsestQuality};
  std::size_t cycles = 0;
  std::size_t failures = 0;
  for (const auto &ldi : ldis) {
    // Built layers hold samples (depth at least z_near) exactly where the mask is set.
    bool built = masks_match(ldi.nol, ldi, ldi.layer_count());
    for (int l = 0; l < ldi.layer_count(); ++l) {
      const auto &grid = ldi.layers[static_cast<std::size_t>(l)];
      for (int y = 0; y < ldi.ext_height; ++y) {
        for (int x = 0; x < ldi.ext_width; ++x) {
          built = built && ((grid(x, y).depth > 0.0) == ldi.has(l, x, y));
        }
      }
    }
    failures += built ? 0 : 1;
    for (const auto preprocess : {Preprocess::Fill, Preprocess::Aggregate}) {
      for (const double q : qualities) {
        const auto decoded = decode_segment(encode_segment(ldi, {q, std::nullopt}, preprocess));
        ++cycles;
        const bool ok = decoded.nol == ldi.nol && decoded.layer_count() == ldi.layer_count() &&
                        masks_match(ldi.nol, decoded, ldi.layer_count());
        failures += ok ? 0 : 1;
      }
    }
  }
  return {failures == 0, std::to_string(ldis.size()) + " LDIs, " + std::to_string(cycles) +
                             " encode/decode cycles, " + std::to_string(failures) + " mismatches"};
}

auto nol_lossless() -> Outcome {
  std::mt19937_64 rng{5};
  std::uniform_int_distribution<int> size{1, 512};
  std::size_t failures = 0;
  std::size_t grids = 0;
  const auto check = [&](const Grid<std::uint8_t> &g) {
    ++grids;
    if (decode_nol(encode_nol(g), g.width(), g.height()) != g) {
      ++failures;
    }
  };
  for (int i = 0; i < 1000; ++i) {
    check(test::random_grid(rng, size(rng), size(rng), 3));
  }
  // Structured: constant, stripes, blocks, gradients and a built LDI's nol.
  for (const int w : {1, 7, 64, 333, 512}) {
    for (const int h : {1, 5, 64, 512}) {
      for (int pattern = 0; pattern < 5; ++pattern) {
        Grid<std::uint8_t> g{w, h, 0};
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            const int values[] = {3, x % 4, (x / 16 + y / 16) % 4, (x + y) * 4 / (w + h), y % 2 * 3};
            g(x, y) = static_cast<std::uint8_t>(values[pattern]);
          }
        }
        check(g);
      }
    }
  }
  const RigSpec rig{};
  check(build_extended_ldi(test::make_dataset(layered_scene(9, rig), rig), 1).ldi.nol);
  return {failures == 0, std::to_string(grids) + " grids, " + std::to_string(failures) + " failures"};
}

auto rate_split() -> Outcome {
  const RigSpec rig{};
  std::size_t reachable = 0;
  std::size_t outside = 0;
  double lo = 1e9;
  double hi = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto ldi =
        build_extended_ldi(test::make_dataset(layered_scene(seed, rig), rig), reference_of(rig)).ldi;
    const auto mask = layer_mask(ldi.nol, 0);
    const auto colour = fill_uncovered(extract_component(ldi, 0, ComponentKind::Y), mask);
    const auto depth = fill_uncovered(extract_component(ldi, 0, ComponentKind::D), mask);
    for (const double target : {0.1, 0.2, 0.3, 0.5, 0.75, 1.0}) {
      const CoderQuality quality{8.0, target};
      const auto c = rate_control(colour, target);
      const auto d = rate_control(depth, *quality.depth_bpp_target());
      if (c.status != RateStatus::Reached || d.status != RateStatus::Reached) {
        continue;
      }
      ++reachable;
      const double ratio = d.achieved_bpp / c.achieved_bpp;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      outside += ratio < 1.8 || ratio > 2.2;
    }
  }
  return {reachable > 0 && outside == 0,
          std::to_string(reachable) + " reachable target pairs, ratio in [" + fmt(lo) + ", " +
              fmt(hi) + "]"};
}

// Curves shared by the monotonicity and rate comparison criteria.
struct Sweep {
  MultiviewDataset dataset;
  std::vector<RdPoint> ldi;
  std::vector<RdPoint> simulcast;
  double seconds{0.0};
};

auto directional_sweep() -> const Sweep & {
  static const Sweep sweep = [] {
    const auto start = std::chrono::steady_clock::now();
    const RigSpec rig{};
    Sweep s;
    s.dataset = test::make_dataset(layered_scene(42, rig), rig);
    SegmentConfig config;
    config.viewpoints = 15;
    config.build.max_layers = 3;
    const std::vector<double> qualities{2.0, 4.0, 8.0, 16.0, 32.0};
    s.ldi = rd_sweep_ldi(s.dataset, config, qualities);
    s.simulcast = rd_sweep_simulcast(s.dataset, config, qualities);
    s.seconds = seconds_since(start);
    return s;
  }();
  return sweep;
}

auto is_monotone(const std::vector<RdPoint> &curve) -> bool {
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].total_bits > curve[i - 1].total_bits ||
        curve[i].mean_psnr > curve[i - 1].mean_psnr) {
      return false;
    }
  }
  return true;
}

auto describe(const std::vector<RdPoint> &curve) -> std::string {
  std::string out;
  for (const auto &p : curve) {
    out += (out.empty() ? "" : " ") + std::to_string(p.total_bits) + "b/" + fmt(p.mean_psnr, 4) +
           "dB";
  }
  return out;
}

auto rd_monotonicity() -> Outcome {
  const auto &s = directional_sweep();
  const bool ldi = s.ldi.size() == 5 && is_monotone(s.ldi);
  const bool sim = s.simulcast.size() == 5 && is_monotone(s.simulcast);
  return {ldi && sim, std::string{"extended_ldi "} + (ldi ? "monotone" : "not monotone") +
                          ", simulcast " + (sim ? "monotone" : "not monotone")};
}

// Smallest fraction over adjacent pairs of one view's valid pixels that land in the other.
auto min_overlap(const MultiviewDataset &ds) -> double {
  double worst = 1.0;
  for (std::size_t k = 0; k + 1 < ds.size(); ++k) {
    for (const auto &[a, b] : {std::pair{k, k + 1}, std::pair{k + 1, k}}) {
      const auto &view = ds.views[a];
      const auto &other = ds.views[b].camera;
      const Warper warp{view.camera, other};
      std::size_t valid = 0;
      std::size_t inside = 0;
      for (int y = 0; y < view.depth.height(); ++y) {
        for (int x = 0; x < view.depth.width(); ++x) {
          if (view.depth.valid(x, y) == 0) {
            continue;
          }
          ++valid;
          const auto px = warp(x, y, view.depth.depth(x, y));
          inside += px && px->u >= -0.5 && px->v >= -0.5 && px->u < other.width - 0.5 &&
                    px->v < other.height - 0.5;
        }
      }
      worst = std::min(worst, static_cast<double>(inside) / static_cast<double>(valid));
    }
  }
  return worst;
}

auto directional_comparison() -> Outcome {
  const auto &s = directional_sweep();
  const double overlap = min_overlap(s.dataset);
  const auto wins = count_rate_wins(s.ldi, s.simulcast);
  const bool layout = s.dataset.size() == 4 && s.ldi.front().view_psnr.size() == 15;
  return {layout && overlap >= 0.6 && wins >= 3 && s.seconds < 300.0,
          std::to_string(wins) + "/5 points with fewer bits at matched PSNR, overlap " +
              fmt(100.0 * overlap) + "%, " + fmt(s.seconds) + " s; extended_ldi " +
              describe(s.ldi) + "; simulcast " + describe(s.simulcast)};
}

auto disocclusion_payoff() -> Outcome {
  const RigSpec rig{};
  std::vector<SceneSpec> scenes{test::three_plane_scene(rig), test::two_plane_scene(rig)};
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    scenes.push_back(layered_scene(seed, rig));
  }
  double worst = 0.0;
  std::size_t layeredHoles = 0;
  std::size_t singleHoles = 0;
  for (const auto &scene : scenes) {
    const auto ds = test::make_dataset(scene, rig);
    const std::size_t ref = reference_of(rig);
    BuildOptions options;
    options.max_layers = 3;
    const auto ldi = build_extended_ldi(ds, ref, options).ldi;
    for (const std::size_t neighbour : {ref - 1, ref + 1}) {
      const auto target = interpolate_cameras(ds.views[ref].camera, ds.views[neighbour].camera, 0.5);
      const std::size_t layered = render_view(ldi, target).hole_count();
      const std::size_t single = warp_view(ds.views[ref], target).hole_count();
      layeredHoles += layered;
      singleHoles += single;
      worst = std::max(worst, static_cast<double>(layered) / static_cast<double>(single));
    }
  }
  return {worst < 0.2, std::to_string(2 * scenes.size()) + " renders, worst hole ratio " +
                           fmt(100.0 * worst) + "% (" + std::to_string(layeredHoles) +
                           " vs " + std::to_string(singleHoles) + " hole pixels)"};
}

auto identity_render() -> Outcome {
  const RigSpec rig{};
  double worst = 1.0;
  for (const auto &scene : {test::three_plane_scene(rig), layered_scene(6, rig),
                            layered_scene(7, rig)}) {
    const auto built =
        build_extended_ldi(test::make_dataset(scene, rig), reference_of(rig)).ldi;
    const auto ldi = decode_segment(encode_segment(built, {kFinestQuality, std::nullopt}));
    const auto out = render_view(ldi, ldi.ref_cam);
    std::size_t cells = 0;
    std::size_t exact = 0;
    for (int y = 0; y < ldi.ext_height; ++y) {
      for (int x = 0; x < ldi.ext_width; ++x) {
        if (!ldi.has(0, x, y)) {
          continue;
        }
        ++cells;
        const auto &p = ldi.layers[0](x, y);
        exact += out.valid(x, y) != 0 && out.image.y(x, y) == p.y &&
                 out.image.cb(x, y) == p.cb && out.image.cr(x, y) == p.cr;
      }
    }
    worst = std::min(worst, static_cast<double>(exact) / static_cast<double>(cells));
  }
  return {worst >= 0.99, "worst exact fraction " + fmt(100.0 * worst, 5) + "%"};
}

} // namespace

auto main() -> int {
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria{
      {"geometry-oracles", geometry_suite},
      {"extended-bounds", extended_bounds},
      {"once-and-only-once", once_and_only_once},
      {"layer-masks", layer_masks},
      {"nol-lossless", nol_lossless},
      {"depth-colour-rate-split", rate_split},
      {"rd-monotonicity", rd_monotonicity},
      {"directional-rate-comparison", directional_comparison},
      {"disocclusion-payoff", disocclusion_payoff},
      {"identity-render", identity_render},
  };
  int failed = 0;
  for (const auto &[name, check] : criteria) {
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      outcome = check();
    } catch (const std::exception &e) {
      outcome = {false, std::string{"exception: "} + e.what()};
    }
    failed += outcome.pass ? 0 : 1;
    std::printf("%s %s: %s [%.1f s]\n", outcome.pass ? "PASS" : "FAIL", name,
                outcome.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
