#pragma once

#include <ldinav/geometry.hpp>
#include <ldinav/grid.hpp>

#include <array>
#include <cstdint>
#include <vector>

namespace ldinav {

/// Full-resolution 8-bit Y/Cb/Cr planes.
struct ViewImage {
  Grid<std::uint8_t> y;
  Grid<std::uint8_t> cb;
  Grid<std::uint8_t> cr;

  ViewImage() = default;
  ViewImage(int width, int height)
      : y{width, height, 0}, cb{width, height, 128}, cr{width, height, 128} {}

  [[nodiscard]] auto width() const noexcept -> int { return y.width(); }
  [[nodiscard]] auto height() const noexcept -> int { return y.height(); }

  friend auto operator==(const ViewImage &, const ViewImage &) -> bool = default;
};

/// Camera-space depth per pixel plus a validity flag.
struct DepthMap {
  Grid<double> depth;
  Grid<std::uint8_t> valid;

  DepthMap() = default;
  DepthMap(int width, int height) : depth{width, height, 0.0}, valid{width, height, 0} {}

  [[nodiscard]] auto width() const noexcept -> int { return depth.width(); }
  [[nodiscard]] auto height() const noexcept -> int { return depth.height(); }

  friend auto operator==(const DepthMap &, const DepthMap &) -> bool = default;
};

struct ViewData {
  CameraParams camera;
  ViewImage image;
  DepthMap depth;

  friend auto operator==(const ViewData &, const ViewData &) -> bool = default;
};

struct MultiviewDataset {
  std::vector<ViewData> views;

  [[nodiscard]] auto size() const noexcept -> std::size_t { return views.size(); }
  [[nodiscard]] auto width() const -> int { return views.front().camera.width; }
  [[nodiscard]] auto height() const -> int { return views.front().camera.height; }

  friend auto operator==(const MultiviewDataset &, const MultiviewDataset &) -> bool = default;
};

// BT.601 full range, round to nearest.
auto rgb_to_ycbcr(std::uint8_t r, std::uint8_t g, std::uint8_t b) -> std::array<std::uint8_t, 3>;

// Inverse of rgb_to_ycbcr. When the YCbCr triple came from an RGB triple, the returned RGB
// converts back to exactly the same YCbCr.
auto ycbcr_to_rgb(std::uint8_t y, std::uint8_t cb, std::uint8_t cr)
    -> std::array<std::uint8_t, 3>;

// 16-bit inverse-depth code: round(65535 * (1/z - 1/z_far) / (1/z_near - 1/z_far)), clamped.
auto quantize_inverse_depth(double z, double zNear, double zFar) -> std::uint16_t;
auto dequantize_inverse_depth(std::uint16_t code, double zNear, double zFar) -> double;

/// Checks the dataset invariants: at least one view, shared sensor size, valid cameras.
void validate_dataset(const MultiviewDataset &dataset);

} // namespace ldinav
