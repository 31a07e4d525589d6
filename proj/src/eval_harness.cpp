#include <ldinav/dataset_io.hpp>
#include <ldinav/eval_harness.hpp>
#include <ldinav/navigation.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ldinav {

auto psnr(const ViewImage &a, const ViewImage &b) -> double {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw std::invalid_argument{"PSNR of images with different sizes"};
  }
  if (a.y.empty()) {
    throw std::invalid_argument{"PSNR of empty images"};
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.y.size(); ++i) {
    const double d = static_cast<double>(a.y.data()[i]) - static_cast<double>(b.y.data()[i]);
    sum += d * d;
  }
  if (sum == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  const double mse = sum / static_cast<double>(a.y.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

auto method_name(Method method) -> std::string {
  return method == Method::ExtendedLdi ? "extended_ldi" : "simulcast";
}

auto parse_method(const std::string &name) -> Method {
  if (name == "extended_ldi") {
    return Method::ExtendedLdi;
  }
  if (name == "simulcast") {
    return Method::Simulcast;
  }
  throw std::invalid_argument{"unknown method '" + name + "'"};
}

namespace {

auto segment_of(const MultiviewDataset &dataset, const SegmentConfig &config) -> NavigationSegment {
  if (config.viewpoints < dataset.size()) {
    throw std::invalid_argument{"fewer segment viewpoints than source views"};
  }
  auto domain = partition_domain(dataset, dataset.size(), config.viewpoints - dataset.size());
  auto seg = std::move(domain.segments.front());
  if (config.reference) {
    if (*config.reference >= dataset.size()) {
      throw std::invalid_argument{"reference view out of range"};
    }
    seg.reference_view = *config.reference;
  }
  return seg;
}

auto path_of(const MultiviewDataset &dataset) -> std::vector<CameraParams> {
  std::vector<CameraParams> path;
  for (const auto &v : dataset.views) {
    path.push_back(v.camera);
  }
  return path;
}

auto capped(double db) -> double { return std::min(db, kPsnrCap); }

auto format_number(double value) -> std::string {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return {buf.data(), res.ptr};
}

auto dump_dir(const SegmentConfig &config, Method method, double q) -> std::filesystem::path {
  return *config.dump_root / method_name(method) / ("q" + format_number(q));
}

auto make_point(Method method, double q, std::uint64_t bits, const MultiviewDataset &dataset,
                std::vector<double> views) -> RdPoint {
  RdPoint p;
  p.method = method;
  p.quality = q;
  p.total_bits = bits;
  p.bpp = static_cast<double>(bits) /
          (static_cast<double>(dataset.size()) * dataset.width() * dataset.height());
  double sum = 0.0;
  for (const double v : views) {
    sum += v;
  }
  p.mean_psnr = sum / static_cast<double>(views.size());
  p.view_psnr = std::move(views);
  return p;
}

auto plane_image(const Grid<std::uint8_t> &plane, ComponentKind kind) -> ComponentImage {
  ComponentImage out{kind, 0, false, Grid<std::int32_t>{plane.width(), plane.height()}};
  std::copy(plane.begin(), plane.end(), out.samples.begin());
  return out;
}

} // namespace

auto segment_ground_truth(const MultiviewDataset &dataset, const SegmentConfig &config)
    -> std::vector<ViewImage> {
  const auto seg = segment_of(dataset, config);
  std::vector<ViewImage> truth;
  for (const auto &vp : seg.viewpoints) {
    if (vp.source_view) {
      truth.push_back(dataset.views[*vp.source_view].image);
    } else {
      truth.push_back(
          ground_truth_virtual_view(dataset, vp.left, vp.left + 1, vp.alpha, config.render));
    }
  }
  return truth;
}

auto rd_sweep_ldi(const MultiviewDataset &dataset, const SegmentConfig &config,
                  const std::vector<double> &qualities) -> std::vector<RdPoint> {
  const auto seg = segment_of(dataset, config);
  const auto truth = segment_ground_truth(dataset, config);
  const auto built = build_extended_ldi(dataset, seg.reference_view, config.build);

  std::vector<RdPoint> points;
  for (const double q : qualities) {
    const auto encoded = encode_segment(built.ldi, CoderQuality{q, std::nullopt}, config.preprocess);
    const auto ldi = decode_segment(encoded);
    std::vector<double> views;
    for (std::size_t i = 0; i < seg.viewpoints.size(); ++i) {
      const auto frame = hole_fill(render_view(ldi, seg.viewpoints[i].camera, config.render));
      views.push_back(capped(psnr(frame.image, truth[i])));
    }
    if (config.dump_root) {
      const auto dir = dump_dir(config, Method::ExtendedLdi, q);
      std::filesystem::create_directories(dir);
      for (const double pose : config.dump_poses) {
        const auto frame =
            hole_fill(render_view(ldi, camera_at_pose(path_of(dataset), pose), config.render));
        write_png(to_rgb(frame.image), dir / render_file_name(pose));
      }
    }
    points.push_back(make_point(Method::ExtendedLdi, q, encoded.total_bits(), dataset,
                                std::move(views)));
  }
  return points;
}

auto simulcast_code(const MultiviewDataset &dataset, const CoderQuality &quality)
    -> SimulcastResult {
  SimulcastResult result;
  result.decoded = dataset;
  for (auto &view : result.decoded.views) {
    const int w = view.image.width();
    const int h = view.image.height();
    const double zn = view.camera.z_near;
    const double zf = view.camera.z_far;
    std::array<Grid<std::uint8_t> *, 3> planes{&view.image.y, &view.image.cb, &view.image.cr};
    for (std::size_t c = 0; c < planes.size(); ++c) {
      const auto kind = kLayerComponents[c];
      const auto bits = encode_component(plane_image(*planes[c], kind), quality);
      result.total_bits += bits.size() * 8;
      const auto dec = decode_component(bits, kind, 0, w, h, quality);
      std::transform(dec.samples.begin(), dec.samples.end(), planes[c]->begin(),
                     [](std::int32_t v) { return static_cast<std::uint8_t>(v); });
    }
    ComponentImage depth{ComponentKind::D, 0, false, Grid<std::int32_t>{w, h}};
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        depth.samples(x, y) =
            view.depth.valid(x, y) != 0 ? quantize_inverse_depth(view.depth.depth(x, y), zn, zf) : 0;
      }
    }
    const auto bits = encode_component(depth, quality);
    result.total_bits += bits.size() * 8;
    const auto dec = decode_component(bits, ComponentKind::D, 0, w, h, quality);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        view.depth.depth(x, y) = dequantize_inverse_depth(
            static_cast<std::uint16_t>(std::clamp(dec.samples(x, y), 0, 65535)), zn, zf);
      }
    }
  }
  return result;
}

auto rd_sweep_simulcast(const MultiviewDataset &dataset, const SegmentConfig &config,
                        const std::vector<double> &qualities) -> std::vector<RdPoint> {
  const auto seg = segment_of(dataset, config);
  const auto truth = segment_ground_truth(dataset, config);

  std::vector<RdPoint> points;
  for (const double q : qualities) {
    const auto coded = simulcast_code(dataset, CoderQuality{q, std::nullopt});
    std::vector<double> views;
    for (std::size_t i = 0; i < seg.viewpoints.size(); ++i) {
      const auto &vp = seg.viewpoints[i];
      const ViewImage frame =
          vp.source_view ? coded.decoded.views[*vp.source_view].image
                         : ground_truth_virtual_view(coded.decoded, vp.left, vp.left + 1, vp.alpha,
                                                     config.render);
      views.push_back(capped(psnr(frame, truth[i])));
    }
    if (config.dump_root) {
      const auto dir = dump_dir(config, Method::Simulcast, q);
      std::filesystem::create_directories(dir);
      for (const double pose : config.dump_poses) {
        const auto base = std::min(static_cast<std::size_t>(std::floor(pose)), dataset.size() - 1);
        const ViewImage frame = ground_truth_virtual_view(
            coded.decoded, base - 1, base, pose - static_cast<double>(base), config.render);
        write_png(to_rgb(frame), dir / render_file_name(pose));
      }
    }
    points.push_back(make_point(Method::Simulcast, q, coded.total_bits, dataset, std::move(views)));
  }
  return points;
}

auto report_csv(const std::vector<RdPoint> &points) -> std::string {
  if (points.empty()) {
    throw std::invalid_argument{"no RD points to report"};
  }
  std::size_t columns = 0;
  for (const auto &p : points) {
    columns = std::max(columns, p.view_psnr.size());
  }
  std::string out = "method,quality,total_bits,bpp,mean_psnr";
  for (std::size_t i = 0; i < columns; ++i) {
    out += ",psnr_" + std::to_string(i);
  }
  out += '\n';
  for (const auto &p : points) {
    out += method_name(p.method) + ',' + format_number(p.quality) + ',' +
           std::to_string(p.total_bits) + ',' + format_number(p.bpp) + ',' +
           format_number(p.mean_psnr);
    for (std::size_t i = 0; i < columns; ++i) {
      out += ',';
      if (i < p.view_psnr.size()) {
        out += format_number(p.view_psnr[i]);
      }
    }
    out += '\n';
  }
  return out;
}

auto parse_report_csv(const std::string &csv) -> std::vector<RdPoint> {
  std::istringstream in{csv};
  std::string line;
  if (!std::getline(in, line) || line.rfind("method,quality,total_bits,bpp,mean_psnr", 0) != 0) {
    throw std::invalid_argument{"not an RD report"};
  }
  auto number = [](const std::string &field, auto &value) {
    const auto *end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
      throw std::invalid_argument{"bad number '" + field + "' in RD report"};
    }
  };
  std::vector<RdPoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> fields;
    std::istringstream row{line};
    std::string field;
    while (std::getline(row, field, ',')) {
      fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
      fields.emplace_back();
    }
    if (fields.size() < 5) {
      throw std::invalid_argument{"short RD report row"};
    }
    RdPoint p;
    p.method = parse_method(fields[0]);
    number(fields[1], p.quality);
    number(fields[2], p.total_bits);
    number(fields[3], p.bpp);
    number(fields[4], p.mean_psnr);
    for (std::size_t i = 5; i < fields.size(); ++i) {
      if (fields[i].empty()) {
        continue;
      }
      double v = 0.0;
      number(fields[i], v);
      p.view_psnr.push_back(v);
    }
    points.push_back(std::move(p));
  }
  return points;
}

void emit_report(const std::vector<RdPoint> &points, const std::filesystem::path &file) {
  const auto csv = report_csv(points);
  if (file.has_parent_path()) {
    std::filesystem::create_directories(file.parent_path());
  }
  std::ofstream out{file, std::ios::binary};
  out << csv;
  if (!out) {
    throw std::runtime_error{"cannot write " + file.string()};
  }
}

auto render_file_name(double pose) -> std::string {
  std::array<char, 48> buf{};
  std::snprintf(buf.data(), buf.size(), "render_%.2f.png", pose);
  return buf.data();
}

auto bits_at_psnr(const std::vector<RdPoint> &curve, double psnrDb, double tolerance)
    -> std::optional<double> {
  if (curve.empty()) {
    return std::nullopt;
  }
  auto sorted = curve;
  std::sort(sorted.begin(), sorted.end(),
            [](const RdPoint &a, const RdPoint &b) { return a.mean_psnr < b.mean_psnr; });
  const auto &lo = sorted.front();
  const auto &hi = sorted.back();
  if (psnrDb < lo.mean_psnr) {
    return lo.mean_psnr - psnrDb <= tolerance ? std::optional{static_cast<double>(lo.total_bits)}
                                              : std::nullopt;
  }
  if (psnrDb > hi.mean_psnr) {
    return psnrDb - hi.mean_psnr <= tolerance ? std::optional{static_cast<double>(hi.total_bits)}
                                              : std::nullopt;
  }
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const auto &a = sorted[i - 1];
    const auto &b = sorted[i];
    if (psnrDb <= b.mean_psnr) {
      if (b.mean_psnr == a.mean_psnr) {
        return static_cast<double>(std::min(a.total_bits, b.total_bits));
      }
      const double t = (psnrDb - a.mean_psnr) / (b.mean_psnr - a.mean_psnr);
      return static_cast<double>(a.total_bits) +
             t * (static_cast<double>(b.total_bits) - static_cast<double>(a.total_bits));
    }
  }
  return static_cast<double>(hi.total_bits);
}

auto count_rate_wins(const std::vector<RdPoint> &ldi, const std::vector<RdPoint> &simulcast,
                     double tolerance) -> std::size_t {
  std::size_t wins = 0;
  for (const auto &p : ldi) {
    const auto bits = bits_at_psnr(simulcast, p.mean_psnr, tolerance);
    if (bits && static_cast<double>(p.total_bits) < *bits) {
      ++wins;
    }
  }
  return wins;
}

} // namespace ldinav
