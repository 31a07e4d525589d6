#pragma once

#include <ldinav/dataset.hpp>
#include <ldinav/geometry.hpp>
#include <ldinav/grid.hpp>
#include <ldinav/ldi_build.hpp>

#include <cstddef>
#include <cstdint>

namespace ldinav {

inline constexpr std::uint8_t kNoLayer = 0xFF;

// Output of a forward warp. `valid` marks pixels that received a sample (or were filled),
// `inpainted` marks pixels whose value came from hole_fill.
struct RenderedView {
  ViewImage image;
  Grid<double> depth;
  Grid<std::uint8_t> valid;
  Grid<std::uint8_t> inpainted;
  Grid<std::uint8_t> source_layer; // winning LDI layer, kNoLayer for holes

  RenderedView() = default;
  RenderedView(int width, int height)
      : image{width, height}, depth{width, height, 0.0}, valid{width, height, 0},
        inpainted{width, height, 0}, source_layer{width, height, kNoLayer} {}

  [[nodiscard]] auto width() const noexcept -> int { return image.width(); }
  [[nodiscard]] auto height() const noexcept -> int { return image.height(); }
  [[nodiscard]] auto hole_count() const -> std::size_t;

  friend auto operator==(const RenderedView &, const RenderedView &) -> bool = default;
};

struct RenderOptions {
  double depth_tolerance{0.01}; // relative z-buffer tie band
  bool adaptive_splat{true};    // 2x2 footprint where the warp stretches more than splat_stretch
  double splat_stretch{1.5};
  int max_layers{255};          // render only layers below this index
  unsigned threads{0};          // 0 = hardware concurrency
};

/// Forward-warps every sample of every layer into `target` with z-buffering. Holes stay
/// flagged in `valid`.
auto render_view(const ExtendedLdi &ldi, const CameraParams &target,
                 const RenderOptions &options = {}) -> RenderedView;

/// Forward-warps a single colour-plus-depth view.
auto warp_view(const ViewData &view, const CameraParams &target,
               const RenderOptions &options = {}) -> RenderedView;

// Each hole takes the nearer valid pixel to its left or right that has the greater depth; holes
// in rows without any valid pixel are then filled the same way from above and below.
auto hole_fill(const RenderedView &view) -> RenderedView;

/// Renders both neighbours into the interpolated camera, blends samples that agree in depth
/// with weights (1 - alpha, alpha) and fills the remaining holes.
auto ground_truth_virtual_view(const MultiviewDataset &dataset, std::size_t left,
                               std::size_t right, double alpha, const RenderOptions &options = {})
    -> ViewImage;

} // namespace ldinav
