#include <ldinav/dataset_io.hpp>
#include <ldinav/errors.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ldinav {

namespace {
auto round_clamp8(double v) -> std::uint8_t {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}
} // namespace

auto rgb_to_ycbcr(std::uint8_t r, std::uint8_t g, std::uint8_t b) -> std::array<std::uint8_t, 3> {
  const double R = r;
  const double G = g;
  const double B = b;
  return {round_clamp8(0.299 * R + 0.587 * G + 0.114 * B),
          round_clamp8(128.0 - 0.168736 * R - 0.331264 * G + 0.5 * B),
          round_clamp8(128.0 + 0.5 * R - 0.418688 * G - 0.081312 * B)};
}

auto ycbcr_to_rgb(std::uint8_t y, std::uint8_t cb, std::uint8_t cr)
    -> std::array<std::uint8_t, 3> {
  const double Y = y;
  const double Cb = cb - 128.0;
  const double Cr = cr - 128.0;
  const std::array<std::uint8_t, 3> nearest{round_clamp8(Y + 1.402 * Cr),
                                            round_clamp8(Y - 0.344136 * Cb - 0.714136 * Cr),
                                            round_clamp8(Y + 1.772 * Cb)};
  const std::array<std::uint8_t, 3> target{y, cb, cr};
  if (rgb_to_ycbcr(nearest[0], nearest[1], nearest[2]) == target) {
    return nearest;
  }
  // Rounding in the forward transform can make the nearest inverse miss by one level.
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dg = -1; dg <= 1; ++dg) {
      for (int db = -1; db <= 1; ++db) {
        const auto r = static_cast<std::uint8_t>(std::clamp(nearest[0] + dr, 0, 255));
        const auto g = static_cast<std::uint8_t>(std::clamp(nearest[1] + dg, 0, 255));
        const auto b = static_cast<std::uint8_t>(std::clamp(nearest[2] + db, 0, 255));
        if (rgb_to_ycbcr(r, g, b) == target) {
          return {r, g, b};
        }
      }
    }
  }
  return nearest;
}

auto quantize_inverse_depth(double z, double zNear, double zFar) -> std::uint16_t {
  const double n = (1.0 / z - 1.0 / zFar) / (1.0 / zNear - 1.0 / zFar);
  return static_cast<std::uint16_t>(std::clamp(std::floor(65535.0 * n + 0.5), 0.0, 65535.0));
}

auto dequantize_inverse_depth(std::uint16_t code, double zNear, double zFar) -> double {
  const double inv = (code / 65535.0) * (1.0 / zNear - 1.0 / zFar) + 1.0 / zFar;
  return 1.0 / inv;
}

void validate_dataset(const MultiviewDataset &dataset) {
  if (dataset.views.empty()) {
    throw std::invalid_argument{"dataset has no views"};
  }
  const int w = dataset.width();
  const int h = dataset.height();
  for (std::size_t k = 0; k < dataset.size(); ++k) {
    const auto &view = dataset.views[k];
    validate_camera(view.camera);
    if (view.camera.width != w || view.camera.height != h || view.image.width() != w ||
        view.image.height() != h || view.depth.width() != w || view.depth.height() != h) {
      throw std::invalid_argument{"view " + std::to_string(k) + " has mismatched dimensions"};
    }
  }
}

// Calibration text format:
//   size <width> <height>
//   view <k>
//   K <fx> <fy> <cx> <cy>
//   R <r00> <r01> ... <r22>
//   t <tx> <ty> <tz>
//   depth_range <z_near> <z_far>
// Blank lines and lines starting with '#' are ignored.
void write_calibration(const std::vector<CameraParams> &cams, const std::filesystem::path &file) {
  std::ofstream out{file};
  if (!out) {
    throw std::runtime_error{"cannot write " + file.string()};
  }
  out << std::setprecision(17);
  out << "# ldinav calibration, world->camera p_cam = R p + t\n";
  out << "size " << cams.front().width << ' ' << cams.front().height << '\n';
  for (std::size_t k = 0; k < cams.size(); ++k) {
    const auto &c = cams[k];
    out << "view " << k << '\n';
    out << "K " << c.fx << ' ' << c.fy << ' ' << c.cx << ' ' << c.cy << '\n';
    out << "R";
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        out << ' ' << c.R(i, j);
      }
    }
    out << "\nt " << c.t.x() << ' ' << c.t.y() << ' ' << c.t.z() << '\n';
    out << "depth_range " << c.z_near << ' ' << c.z_far << '\n';
  }
}

auto parse_calibration(const std::filesystem::path &file) -> std::vector<CameraParams> {
  std::ifstream in{file};
  if (!in) {
    throw LoadError{file.string() + ": cannot open calibration file"};
  }
  const auto where = [&](int line) { return file.string() + ":" + std::to_string(line) + ": "; };

  std::vector<CameraParams> cams;
  std::vector<unsigned> seen; // bitmask of K/R/t/depth_range per view
  int width = 0;
  int height = 0;
  std::string text;
  int lineNo = 0;
  while (std::getline(in, text)) {
    ++lineNo;
    std::istringstream line{text};
    std::string key;
    if (!(line >> key) || key.front() == '#') {
      continue;
    }
    const auto numbers = [&](int count) {
      std::vector<double> values(static_cast<std::size_t>(count));
      for (auto &v : values) {
        if (!(line >> v)) {
          throw LoadError{where(lineNo) + "field '" + key + "' expects " +
                          std::to_string(count) + " numbers"};
        }
      }
      return values;
    };
    if (key == "size") {
      const auto v = numbers(2);
      width = static_cast<int>(v[0]);
      height = static_cast<int>(v[1]);
      continue;
    }
    if (key == "view") {
      const auto v = numbers(1);
      if (static_cast<std::size_t>(v[0]) != cams.size()) {
        throw LoadError{where(lineNo) + "views must be numbered consecutively from 0"};
      }
      cams.emplace_back();
      seen.push_back(0);
      continue;
    }
    if (cams.empty()) {
      throw LoadError{where(lineNo) + "field '" + key + "' appears before any view"};
    }
    auto &cam = cams.back();
    if (key == "K") {
      const auto v = numbers(4);
      cam.fx = v[0];
      cam.fy = v[1];
      cam.cx = v[2];
      cam.cy = v[3];
      seen.back() |= 1U;
    } else if (key == "R") {
      const auto v = numbers(9);
      for (int i = 0; i < 9; ++i) {
        cam.R(i / 3, i % 3) = v[static_cast<std::size_t>(i)];
      }
      seen.back() |= 2U;
    } else if (key == "t") {
      const auto v = numbers(3);
      cam.t = Vec3{v[0], v[1], v[2]};
      seen.back() |= 4U;
    } else if (key == "depth_range") {
      const auto v = numbers(2);
      cam.z_near = v[0];
      cam.z_far = v[1];
      seen.back() |= 8U;
    } else {
      throw LoadError{where(lineNo) + "unknown field '" + key + "'"};
    }
  }
  if (width <= 0 || height <= 0) {
    throw LoadError{file.string() + ": missing or invalid 'size' field"};
  }
  static constexpr std::array<const char *, 4> fieldNames{"K", "R", "t", "depth_range"};
  for (std::size_t k = 0; k < cams.size(); ++k) {
    for (unsigned bit = 0; bit < 4; ++bit) {
      if ((seen[k] & (1U << bit)) == 0) {
        throw LoadError{file.string() + ": view " + std::to_string(k) + " missing field '" +
                        fieldNames[bit] + "'"};
      }
    }
    cams[k].width = width;
    cams[k].height = height;
    if (!is_orthonormal(cams[k].R)) {
      throw LoadError{file.string() + ": view " + std::to_string(k) +
                      " field 'R' is not orthonormal"};
    }
    try {
      validate_camera(cams[k]);
    } catch (const std::invalid_argument &e) {
      throw LoadError{file.string() + ": view " + std::to_string(k) + ": " + e.what()};
    }
  }
  return cams;
}

auto to_rgb(const ViewImage &image) -> RgbImage {
  RgbImage out{image.width(), image.height(), {}};
  out.rgb.resize(static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.height) * 3);
  for (std::size_t i = 0; i < image.y.size(); ++i) {
    const auto rgb = ycbcr_to_rgb(image.y.data()[i], image.cb.data()[i], image.cr.data()[i]);
    std::copy(rgb.begin(), rgb.end(), out.rgb.begin() + static_cast<std::ptrdiff_t>(3 * i));
  }
  return out;
}

auto from_rgb(const RgbImage &image) -> ViewImage {
  ViewImage out{image.width, image.height};
  for (std::size_t i = 0; i < out.y.size(); ++i) {
    const auto ycc = rgb_to_ycbcr(image.rgb[3 * i], image.rgb[3 * i + 1], image.rgb[3 * i + 2]);
    out.y.data()[i] = ycc[0];
    out.cb.data()[i] = ycc[1];
    out.cr.data()[i] = ycc[2];
  }
  return out;
}

auto load_dataset(const std::filesystem::path &dir) -> MultiviewDataset {
  const auto cams = parse_calibration(dir / "cameras.txt");
  MultiviewDataset dataset;
  for (std::size_t k = 0; k < cams.size(); ++k) {
    const auto viewFile = dir / ("view_" + std::to_string(k) + ".png");
    const auto depthFile = dir / ("depth_" + std::to_string(k) + ".pgm");
    if (!std::filesystem::exists(viewFile)) {
      throw LoadError{viewFile.string() + ": missing view image"};
    }
    if (!std::filesystem::exists(depthFile)) {
      throw LoadError{depthFile.string() + ": missing depth map"};
    }
    const auto rgb = read_png(viewFile);
    if (rgb.width != cams[k].width || rgb.height != cams[k].height) {
      throw LoadError{viewFile.string() + ": image size does not match calibration 'size'"};
    }
    const auto codes = read_pgm16(depthFile);
    if (codes.width() != cams[k].width || codes.height() != cams[k].height) {
      throw LoadError{depthFile.string() + ": depth size does not match calibration 'size'"};
    }
    ViewData view{cams[k], from_rgb(rgb), DepthMap{codes.width(), codes.height()}};
    for (std::size_t i = 0; i < codes.size(); ++i) {
      const auto code = codes.data()[i];
      if (code != 0) {
        view.depth.valid.data()[i] = 1;
        view.depth.depth.data()[i] =
            dequantize_inverse_depth(code, cams[k].z_near, cams[k].z_far);
      }
    }
    dataset.views.push_back(std::move(view));
  }
  if (dataset.views.empty()) {
    throw LoadError{(dir / "cameras.txt").string() + ": no views listed"};
  }
  return dataset;
}

void write_dataset(const MultiviewDataset &dataset, const std::filesystem::path &dir) {
  validate_dataset(dataset);
  std::filesystem::create_directories(dir);
  std::vector<CameraParams> cams;
  for (const auto &view : dataset.views) {
    cams.push_back(view.camera);
  }
  write_calibration(cams, dir / "cameras.txt");
  for (std::size_t k = 0; k < dataset.size(); ++k) {
    const auto &view = dataset.views[k];
    write_png(to_rgb(view.image), dir / ("view_" + std::to_string(k) + ".png"));
    Grid<std::uint16_t> codes{view.depth.width(), view.depth.height(), 0};
    for (std::size_t i = 0; i < codes.size(); ++i) {
      if (view.depth.valid.data()[i] != 0) {
        const auto code = quantize_inverse_depth(view.depth.depth.data()[i], view.camera.z_near,
                                                 view.camera.z_far);
        codes.data()[i] = std::max<std::uint16_t>(code, 1);
      }
    }
    write_pgm16(codes, dir / ("depth_" + std::to_string(k) + ".pgm"));
  }
}

} // namespace ldinav
