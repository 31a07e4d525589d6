#include <ldinav/errors.hpp>
#include <ldinav/ldi_build.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ldinav {

auto ExtendedLdi::pixel_count() const -> std::size_t {
  return std::accumulate(nol.begin(), nol.end(), std::size_t{0});
}

auto ExtendedLdi::layer_support(int layer) const -> std::size_t {
  return static_cast<std::size_t>(
      std::count_if(nol.begin(), nol.end(), [layer](std::uint8_t n) { return n > layer; }));
}

namespace {
auto is_boundary_pixel(const DepthMap &depth, int x, int y, double discontinuity) -> bool {
  if (x == 0 || y == 0 || x == depth.width() - 1 || y == depth.height() - 1) {
    return true;
  }
  const double z = depth.depth(x, y);
  constexpr std::array<std::array<int, 2>, 4> neighbours{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
  for (const auto &[dx, dy] : neighbours) {
    if (depth.valid(x + dx, y + dy) == 0) {
      return true;
    }
    const double zn = depth.depth(x + dx, y + dy);
    if (std::abs(z - zn) > discontinuity * std::min(z, zn)) {
      return true;
    }
  }
  return false;
}
} // namespace

auto compute_extended_bounds(const CameraParams &ref, const MultiviewDataset &dataset,
                             double discontinuity) -> ExtendedBounds {
  if (dataset.views.empty()) {
    throw std::invalid_argument{"dataset has no views"};
  }
  int minX = 0;
  int minY = 0;
  int maxX = ref.width - 1;
  int maxY = ref.height - 1;
  std::size_t inFront = 0;
  for (const auto &view : dataset.views) {
    const Warper warp{view.camera, ref};
    for (int y = 0; y < view.depth.height(); ++y) {
      for (int x = 0; x < view.depth.width(); ++x) {
        if (view.depth.valid(x, y) == 0 || !is_boundary_pixel(view.depth, x, y, discontinuity)) {
          continue;
        }
        const auto px = warp(x, y, view.depth.depth(x, y));
        if (!px) {
          continue;
        }
        ++inFront;
        minX = std::min(minX, to_cell(px->u));
        maxX = std::max(maxX, to_cell(px->u));
        minY = std::min(minY, to_cell(px->v));
        maxY = std::max(maxY, to_cell(px->v));
      }
    }
  }
  if (inFront == 0) {
    throw BuildError{"every boundary point warps behind the reference camera"};
  }
  return ExtendedBounds{-minX, -minY, maxX - minX + 1, maxY - minY + 1};
}

auto adjust_reference_camera(const CameraParams &ref, const ExtendedBounds &bounds)
    -> CameraParams {
  CameraParams out = ref;
  out.cx += bounds.origin_dx;
  out.cy += bounds.origin_dy;
  out.width = bounds.ext_width;
  out.height = bounds.ext_height;
  return out;
}

auto view_order(const MultiviewDataset &dataset, std::size_t refIndex)
    -> std::vector<std::size_t> {
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const Vec3 refCenter = dataset.views[refIndex].camera.center();
  // Distances are compared at 1e-9 resolution so rounding in the centres cannot break ties.
  std::vector<long long> distance(dataset.size());
  for (std::size_t k = 0; k < dataset.size(); ++k) {
    distance[k] = std::llround((dataset.views[k].camera.center() - refCenter).norm() * 1e9);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if ((a == refIndex) != (b == refIndex)) {
      return a == refIndex;
    }
    return distance[a] < distance[b];
  });
  return order;
}

auto build_extended_ldi(const MultiviewDataset &dataset, std::size_t refIndex,
                        const BuildOptions &options) -> LdiBuildResult {
  if (refIndex >= dataset.size()) {
    throw std::invalid_argument{"reference view index out of range"};
  }
  if (options.max_layers < 1 || options.max_layers > 255) {
    throw std::invalid_argument{"layer cap must lie in [1, 255]"};
  }
  validate_dataset(dataset);

  const auto &ref = dataset.views[refIndex].camera;
  const ExtendedBounds bounds = options.extend_canvas
                                    ? compute_extended_bounds(ref, dataset)
                                    : ExtendedBounds{0, 0, ref.width, ref.height};
  const CameraParams adjusted = adjust_reference_camera(ref, bounds);
  const auto refSource = static_cast<std::uint16_t>(refIndex);
  const auto cap = static_cast<std::size_t>(options.max_layers);

  Grid<std::vector<LdiPixel>> columns{bounds.ext_width, bounds.ext_height};
  BuildReport report;

  for (const std::size_t k : view_order(dataset, refIndex)) {
    const auto &view = dataset.views[k];
    const Warper warp{view.camera, adjusted};
    for (int y = 0; y < view.depth.height(); ++y) {
      for (int x = 0; x < view.depth.width(); ++x) {
        if (view.depth.valid(x, y) == 0) {
          continue;
        }
        ++report.warped;
        const auto px = warp(x, y, view.depth.depth(x, y));
        if (!px) {
          ++report.rejected;
          continue;
        }
        const int cx = to_cell(px->u);
        const int cy = to_cell(px->v);
        const double z = px->depth;
        if (!columns.contains(cx, cy) || z < adjusted.z_near || z > adjusted.z_far) {
          ++report.rejected;
          continue;
        }
        auto &column = columns(cx, cy);
        const bool duplicate = std::any_of(column.begin(), column.end(), [&](const LdiPixel &s) {
          return std::abs(z - s.depth) <= options.depth_tolerance * s.depth;
        });
        if (duplicate) {
          ++report.merged;
          continue;
        }
        if (!column.empty() && column.front().source_view == refSource && z < column.front().depth &&
            k != refIndex) {
          ++report.rejected;
          continue;
        }
        const LdiPixel sample{view.image.y(x, y), view.image.cb(x, y), view.image.cr(x, y), z,
                              static_cast<std::uint16_t>(k)};
        const auto pos = std::upper_bound(
            column.begin(), column.end(), z,
            [](double depth, const LdiPixel &s) { return depth < s.depth; });
        column.insert(pos, sample);
        if (column.size() > cap) {
          column.pop_back();
          ++report.dropped;
        }
      }
    }
  }

  ExtendedLdi ldi;
  ldi.ref_cam = adjusted;
  ldi.origin_dx = bounds.origin_dx;
  ldi.origin_dy = bounds.origin_dy;
  ldi.ext_width = bounds.ext_width;
  ldi.ext_height = bounds.ext_height;
  ldi.nol = Grid<std::uint8_t>{bounds.ext_width, bounds.ext_height, 0};
  std::size_t depthMax = 1;
  for (const auto &column : columns) {
    depthMax = std::max(depthMax, column.size());
  }
  ldi.layers.assign(depthMax, Grid<LdiPixel>{bounds.ext_width, bounds.ext_height});
  for (int y = 0; y < bounds.ext_height; ++y) {
    for (int x = 0; x < bounds.ext_width; ++x) {
      const auto &column = columns(x, y);
      ldi.nol(x, y) = static_cast<std::uint8_t>(column.size());
      for (std::size_t l = 0; l < column.size(); ++l) {
        ldi.layers[l](x, y) = column[l];
      }
      report.placed += column.size();
    }
  }
  return LdiBuildResult{std::move(ldi), report};
}

auto check_ldi_invariants(const ExtendedLdi &ldi, std::optional<double> depthTolerance)
    -> std::optional<std::string> {
  if (ldi.nol.width() != ldi.ext_width || ldi.nol.height() != ldi.ext_height ||
      ldi.ref_cam.width != ldi.ext_width || ldi.ref_cam.height != ldi.ext_height) {
    return "canvas dimensions disagree";
  }
  if (ldi.origin_dx < 0 || ldi.origin_dy < 0) {
    return "negative origin offset";
  }
  for (const auto &layer : ldi.layers) {
    if (layer.width() != ldi.ext_width || layer.height() != ldi.ext_height) {
      return "layer dimensions disagree with canvas";
    }
  }
  for (int y = 0; y < ldi.ext_height; ++y) {
    for (int x = 0; x < ldi.ext_width; ++x) {
      const int n = ldi.nol(x, y);
      if (n > ldi.layer_count()) {
        return "nol exceeds layer count at (" + std::to_string(x) + "," + std::to_string(y) + ")";
      }
      for (int l = 0; l < n; ++l) {
        const double z = ldi.layers[static_cast<std::size_t>(l)](x, y).depth;
        if (z < ldi.ref_cam.z_near || z > ldi.ref_cam.z_far) {
          return "depth outside reference range at (" + std::to_string(x) + "," +
                 std::to_string(y) + ")";
        }
        if (depthTolerance && l + 1 < n) {
          const double zNext = ldi.layers[static_cast<std::size_t>(l + 1)](x, y).depth;
          if (!(z < zNext - *depthTolerance * z)) {
            return "layer depths not strictly increasing at (" + std::to_string(x) + "," +
                   std::to_string(y) + ")";
          }
        }
      }
    }
  }
  return std::nullopt;
}

} // namespace ldinav
