// Command-line front end for building, coding, rendering, evaluating and serving extended LDIs.
#include <ldinav/dataset_io.hpp>
#include <ldinav/errors.hpp>
#include <ldinav/eval_harness.hpp>
#include <ldinav/ldi_build.hpp>
#include <ldinav/navigation.hpp>
#include <ldinav/segment_container.hpp>
#include <ldinav/service.hpp>
#include <ldinav/synthetic_scene.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

namespace fs = std::filesystem;
using namespace ldinav;

namespace {

struct Common {
  fs::path dataset;
  std::optional<std::size_t> ref;
  int layers{3};
  double quality{8.0};
  std::optional<double> bpp;
  Preprocess preprocess{Preprocess::Fill};
  std::size_t viewsPerSegment{4};
  std::size_t viewpoints{15};
};

void add_dataset(CLI::App *app, Common &c) {
  app->add_option("--dataset", c.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
}

void add_coding(CLI::App *app, Common &c) {
  app->add_option("--ref", c.ref, "Reference view index (default: median view)");
  app->add_option("--layers", c.layers, "Maximum LDI layers")->check(CLI::Range(1, 255));
  app->add_option("--quality", c.quality, "Colour quantizer step q")
      ->check(CLI::Range(kFinestQuality, kCoarsestQuality));
  app->add_option("--bpp", c.bpp, "Colour bits per pixel target (depth gets twice)")
      ->check(CLI::PositiveNumber);
  app->add_option_function<std::string>(
         "--preprocess",
         [&c](const std::string &mode) {
           c.preprocess = mode == "aggregate" ? Preprocess::Aggregate : Preprocess::Fill;
         },
         "Back-layer preprocessing")
      ->check(CLI::IsMember({"fill", "aggregate"}))
      ->default_str("fill");
}

void add_segmenting(CLI::App *app, Common &c) {
  app->add_option("--views-per-segment", c.viewsPerSegment, "Original views per segment (M)")
      ->check(CLI::PositiveNumber);
  app->add_option("--viewpoints", c.viewpoints, "Viewpoints per segment (N)")
      ->check(CLI::PositiveNumber);
}

auto build_options(const Common &c) -> BuildOptions {
  BuildOptions options;
  options.max_layers = c.layers;
  return options;
}

auto quality_of(const Common &c) -> CoderQuality { return CoderQuality{c.quality, c.bpp}; }

auto reference_of(const Common &c, const MultiviewDataset &dataset) -> std::size_t {
  const std::size_t ref = c.ref.value_or((dataset.size() - 1) / 2);
  if (ref >= dataset.size()) {
    throw std::invalid_argument{"--ref " + std::to_string(ref) + " out of range"};
  }
  return ref;
}

auto make_cache(const Common &c, MultiviewDataset dataset) -> std::unique_ptr<SegmentCache> {
  const std::size_t m = std::min(c.viewsPerSegment, dataset.size());
  const std::size_t virtuals = c.viewpoints > m ? c.viewpoints - m : 0;
  auto domain = partition_domain(dataset, m, virtuals);
  if (c.ref) {
    for (auto &seg : domain.segments) {
      if (std::find(seg.source_views.begin(), seg.source_views.end(), *c.ref) !=
          seg.source_views.end()) {
        seg.reference_view = *c.ref;
      }
    }
  }
  SegmentSettings settings{build_options(c), quality_of(c), c.preprocess, {}};
  return std::make_unique<SegmentCache>(std::move(dataset), std::move(domain), settings);
}

auto read_file(const fs::path &file) -> std::vector<std::uint8_t> {
  std::ifstream in{file, std::ios::binary};
  if (!in) {
    throw std::runtime_error{"cannot open " + file.string()};
  }
  return {std::istreambuf_iterator<char>{in}, {}};
}

void write_file(const fs::path &file, const std::vector<std::uint8_t> &bytes) {
  if (file.has_parent_path()) {
    fs::create_directories(file.parent_path());
  }
  std::ofstream out{file, std::ios::binary};
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error{"cannot write " + file.string()};
  }
}

void print_report(const BuildReport &r, const ExtendedLdi &ldi) {
  std::printf("canvas %dx%d origin (%d,%d) layers %d\n", ldi.ext_width, ldi.ext_height,
              ldi.origin_dx, ldi.origin_dy, ldi.layer_count());
  for (int l = 0; l < ldi.layer_count(); ++l) {
    std::printf("layer %d: %zu samples\n", l, ldi.layer_support(l));
  }
  std::printf("warped %zu placed %zu merged %zu dropped %zu rejected %zu\n", r.warped, r.placed,
              r.merged, r.dropped, r.rejected);
}

void dump_ldi(const ExtendedLdi &ldi, const fs::path &dir) {
  fs::create_directories(dir);
  write_pgm8(ldi.nol, dir / "nol.pgm");
  for (int l = 0; l < ldi.layer_count(); ++l) {
    ViewImage img{ldi.ext_width, ldi.ext_height};
    for (int y = 0; y < ldi.ext_height; ++y) {
      for (int x = 0; x < ldi.ext_width; ++x) {
        if (ldi.has(l, x, y)) {
          const auto &p = ldi.layers[static_cast<std::size_t>(l)](x, y);
          img.y(x, y) = p.y;
          img.cb(x, y) = p.cb;
          img.cr(x, y) = p.cr;
        }
      }
    }
    write_png(to_rgb(img), dir / ("layer_" + std::to_string(l) + ".png"));
  }
}

auto parse_list(const std::string &text) -> std::vector<double> {
  std::vector<double> out;
  std::stringstream in{text};
  std::string item;
  while (std::getline(in, item, ',')) {
    out.push_back(std::stod(item));
  }
  return out;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Extended layered depth image codec and navigation tools"};
  app.require_subcommand(1);
  Common c;

  auto *generate = app.add_subcommand("generate", "Write a synthetic layered-plane dataset");
  RigSpec rig;
  std::uint64_t seed = 1;
  fs::path genOut;
  generate->add_option("--out", genOut, "Output dataset directory")->required();
  generate->add_option("--views", rig.views, "Number of cameras")->check(CLI::Range(1, 64));
  generate->add_option("--width", rig.width)->check(CLI::Range(16, 4096));
  generate->add_option("--height", rig.height)->check(CLI::Range(16, 4096));
  generate->add_option("--baseline", rig.baseline)->check(CLI::PositiveNumber);
  generate->add_option("--seed", seed);

  auto *build = app.add_subcommand("build-ldi", "Build an extended LDI and print its statistics");
  fs::path buildOut;
  add_dataset(build, c);
  add_coding(build, c);
  build->add_option("--out", buildOut, "Directory for per-layer PNGs and the NOL map");

  auto *encode = app.add_subcommand("encode", "Build and encode an extended LDI");
  fs::path encodeOut;
  add_dataset(encode, c);
  add_coding(encode, c);
  encode->add_option("--out", encodeOut, "Output XLDI file")->required();

  auto *decode = app.add_subcommand("decode", "Decode an XLDI file into per-layer images");
  fs::path decodeIn;
  fs::path decodeOut;
  decode->add_option("--input", decodeIn, "XLDI file")->required()->check(CLI::ExistingFile);
  decode->add_option("--out", decodeOut, "Output directory")->required();

  auto *synth = app.add_subcommand("synthesize", "Render a pose from its navigation segment");
  double pose = 1.0;
  fs::path synthOut;
  add_dataset(synth, c);
  add_coding(synth, c);
  add_segmenting(synth, c);
  synth->add_option("--pose", pose, "Fractional 1-based camera index")->required();
  synth->add_option("--out", synthOut, "Output PNG")->required();

  auto *eval = app.add_subcommand("eval", "Rate-distortion sweep of extended LDI and simulcast");
  std::string qualities = "2,4,8,16,32";
  std::string dumpPoses = "2.01";
  fs::path evalOut = "out";
  add_dataset(eval, c);
  add_coding(eval, c);
  eval->add_option("--viewpoints", c.viewpoints, "Viewpoints in the segment (N)");
  eval->add_option("--qualities", qualities, "Comma-separated quantizer steps");
  eval->add_option("--poses", dumpPoses, "Comma-separated poses to dump as PNG");
  eval->add_option("--out", evalOut, "Output root");

  auto *serve = app.add_subcommand("serve", "Serve segments and rendered views over HTTP");
  int port = 8080;
  std::string host = "127.0.0.1";
  add_dataset(serve, c);
  add_coding(serve, c);
  add_segmenting(serve, c);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--host", host);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      const auto scene = layered_scene(seed, rig);
      write_dataset(generate_synthetic_scene(scene, linear_rig(rig)), genOut);
      std::printf("wrote %d views to %s\n", rig.views, genOut.c_str());
    } else if (*build) {
      const auto dataset = load_dataset(c.dataset);
      const auto result = build_extended_ldi(dataset, reference_of(c, dataset), build_options(c));
      print_report(result.report, result.ldi);
      if (!buildOut.empty()) {
        dump_ldi(result.ldi, buildOut);
      }
    } else if (*encode) {
      const auto dataset = load_dataset(c.dataset);
      const auto result = build_extended_ldi(dataset, reference_of(c, dataset), build_options(c));
      const auto segment = encode_segment(result.ldi, quality_of(c), c.preprocess);
      write_file(encodeOut, segment.bytes);
      for (const auto &s : segment.streams) {
        std::printf("layer %d kind %d: %zu bytes q %g\n", s.layer, static_cast<int>(s.kind),
                    s.length, s.q);
      }
      std::printf("total %zu bytes\n", segment.bytes.size());
    } else if (*decode) {
      const auto segment = parse_segment(read_file(decodeIn));
      const auto ldi = decode_segment(segment);
      dump_ldi(ldi, decodeOut);
      std::printf("decoded %dx%d, %d layers, %zu samples\n", ldi.ext_width, ldi.ext_height,
                  ldi.layer_count(), ldi.pixel_count());
    } else if (*synth) {
      auto cache = make_cache(c, load_dataset(c.dataset));
      write_file(synthOut, render_pose_png(*cache, pose));
    } else if (*eval) {
      const auto dataset = load_dataset(c.dataset);
      const auto name = fs::absolute(c.dataset).lexically_normal().filename().string();
      SegmentConfig config;
      config.viewpoints = std::max(c.viewpoints, dataset.size());
      config.reference = c.ref;
      config.build = build_options(c);
      config.preprocess = c.preprocess;
      config.dump_root = evalOut / name;
      config.dump_poses = parse_list(dumpPoses);
      const auto qs = parse_list(qualities);
      auto points = rd_sweep_ldi(dataset, config, qs);
      const auto sim = rd_sweep_simulcast(dataset, config, qs);
      const auto wins = count_rate_wins(points, sim);
      points.insert(points.end(), sim.begin(), sim.end());
      emit_report(points, evalOut / name / "rd.csv");
      for (const auto &p : points) {
        std::printf("%-12s q %-6g bits %10llu bpp %.4f psnr %.2f dB\n",
                    method_name(p.method).c_str(), p.quality,
                    static_cast<unsigned long long>(p.total_bits), p.bpp, p.mean_psnr);
      }
      std::printf("extended LDI needs fewer bits at matched PSNR for %zu of %zu points\n", wins,
                  qs.size());
    } else if (*serve) {
      auto cache = make_cache(c, load_dataset(c.dataset));
      NavigationService service{*cache};
      std::printf("serving %zu segments on %s:%d\n", cache->domain().segments.size(), host.c_str(),
                  port);
      std::fflush(stdout);
      service.run(host, port);
    }
  } catch (const DecodeError &e) {
    std::fprintf(stderr, "decode error: %s\n", e.what());
    return 2;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
