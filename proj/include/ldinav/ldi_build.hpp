#pragma once

#include <ldinav/dataset.hpp>
#include <ldinav/geometry.hpp>
#include <ldinav/grid.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ldinav {

struct LdiPixel {
  std::uint8_t y{0};
  std::uint8_t cb{128};
  std::uint8_t cr{128};
  double depth{0.0}; // camera-space z of the adjusted reference camera
  std::uint16_t source_view{0};

  friend auto operator==(const LdiPixel &, const LdiPixel &) -> bool = default;
};

inline constexpr std::uint16_t kUnknownSourceView = 0xFFFF;

// Layered depth image on an enlarged canvas. Cell (x, y) holds nol(x, y) samples stored
// front to back in layers[0 .. nol(x, y) - 1]; entries of unpopulated layers are unspecified.
struct ExtendedLdi {
  CameraParams ref_cam; // principal point already shifted, width/height = canvas size
  int origin_dx{0};
  int origin_dy{0};
  int ext_width{0};
  int ext_height{0};
  std::vector<Grid<LdiPixel>> layers;
  Grid<std::uint8_t> nol;

  [[nodiscard]] auto layer_count() const noexcept -> int { return static_cast<int>(layers.size()); }
  [[nodiscard]] auto has(int layer, int x, int y) const -> bool { return nol(x, y) > layer; }
  [[nodiscard]] auto pixel_count() const -> std::size_t;
  /// Number of populated cells in one layer.
  [[nodiscard]] auto layer_support(int layer) const -> std::size_t;

  friend auto operator==(const ExtendedLdi &, const ExtendedLdi &) -> bool = default;
};

struct BuildReport {
  std::size_t warped{0};   // valid source samples considered
  std::size_t placed{0};   // samples present in the final LDI
  std::size_t merged{0};   // duplicates of an existing sample (same 3-D point)
  std::size_t dropped{0};  // evicted because a cell exceeded the layer cap
  std::size_t rejected{0}; // behind camera, outside canvas or depth range, or in front of a
                           // reference-view sample

  [[nodiscard]] auto consistent() const noexcept -> bool {
    return warped == placed + merged + dropped + rejected;
  }
};

struct ExtendedBounds {
  int origin_dx{0};
  int origin_dy{0};
  int ext_width{0};
  int ext_height{0};

  friend auto operator==(const ExtendedBounds &, const ExtendedBounds &) -> bool = default;
};

struct BuildOptions {
  double depth_tolerance{0.01}; // relative, for duplicate merge
  int max_layers{3};
  bool extend_canvas{true};     // false builds a common LDI restricted to the reference frame
};

/// Nearest-integer cell of a continuous image coordinate.
inline auto to_cell(double coordinate) -> int {
  return static_cast<int>(std::floor(coordinate + 0.5));
}

// Canvas that contains the warp of every boundary point of every view into `ref`. Boundary
// points are the frame border plus depth-discontinuity pixels; on piecewise-planar scenes the
// warped extremes of each planar region lie on its boundary.
auto compute_extended_bounds(const CameraParams &ref, const MultiviewDataset &dataset,
                             double discontinuity = 0.01) -> ExtendedBounds;

auto adjust_reference_camera(const CameraParams &ref, const ExtendedBounds &bounds)
    -> CameraParams;

/// Reference first, then remaining views by increasing centre distance (index breaks ties).
auto view_order(const MultiviewDataset &dataset, std::size_t refIndex) -> std::vector<std::size_t>;

struct LdiBuildResult {
  ExtendedLdi ldi;
  BuildReport report;
};

auto build_extended_ldi(const MultiviewDataset &dataset, std::size_t refIndex,
                        const BuildOptions &options = {}) -> LdiBuildResult;

/// Returns a description of the first violated ExtendedLdi invariant, if any. Without a
/// tolerance the per-column depth order is not checked.
auto check_ldi_invariants(const ExtendedLdi &ldi, std::optional<double> depthTolerance = 0.01)
    -> std::optional<std::string>;

} // namespace ldinav
