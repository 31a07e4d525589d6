#pragma once

#include <ldinav/component_coder.hpp>
#include <ldinav/grid.hpp>
#include <ldinav/ldi_build.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ldinav {

enum class ComponentKind : std::uint8_t { Y = 0, Cb = 1, Cr = 2, D = 3, Nol = 4 };

inline constexpr std::array<ComponentKind, 4> kLayerComponents{ComponentKind::Y, ComponentKind::Cb,
                                                               ComponentKind::Cr, ComponentKind::D};

// Dense or sparse plane of one layer component. Colour samples are 8-bit; D samples are the
// 16-bit inverse-depth code over the reference camera's depth range. A residual image holds
// signed differences against a base layer.
struct ComponentImage {
  ComponentKind kind{ComponentKind::Y};
  int layer{0};
  bool residual{false};
  Grid<std::int32_t> samples;

  friend auto operator==(const ComponentImage &, const ComponentImage &) -> bool = default;
};

struct LayerMask {
  int layer{0};
  Grid<std::uint8_t> bits;
};

/// Finest and coarsest quantizer settings reachable through rate control.
inline constexpr double kFinestQuality = 0.25;
inline constexpr double kCoarsestQuality = 2048.0;

struct CoderQuality {
  double q_color{8.0};                   // quantizer step in 8-bit sample units
  std::optional<double> bpp_color_target; // per colour component stream

  [[nodiscard]] auto depth_bpp_target() const -> std::optional<double> {
    if (!bpp_color_target) {
      return std::nullopt;
    }
    return 2.0 * *bpp_color_target;
  }
};

auto max_sample(ComponentKind kind) -> std::int32_t;

// Colour uses step q. Depth uses q / 2 in 8-bit-equivalent units, i.e. (q / 2) * 256 on the
// 16-bit code, so depth gets twice the fidelity of colour at the same q.
auto quantizer_step(ComponentKind kind, double q) -> double;
auto plane_format(ComponentKind kind, bool residual, double q) -> PlaneFormat;

/// m_l(x, y) = 1 iff nol(x, y) > l.
auto layer_mask(const Grid<std::uint8_t> &nol, int layer) -> LayerMask;

/// Sparse component of one layer; cells outside the layer support hold 0.
auto extract_component(const ExtendedLdi &ldi, int layer, ComponentKind kind) -> ComponentImage;

/// mask ? comp : base, per pixel.
auto layer_fill(const ComponentImage &comp, const ComponentImage &base, const LayerMask &mask)
    -> ComponentImage;

// Fills cells outside the mask by nearest-valid replication: left-to-right row scan, then
// right-to-left, then the same vertically for rows that had no valid cell. A plane with no
// valid cell at all becomes mid-grey.
auto fill_uncovered(const ComponentImage &comp, const LayerMask &mask) -> ComponentImage;

/// Keeps only masked samples; the rest become 0. Inverse of layer_fill given the mask.
auto strip_masked(const ComponentImage &comp, const LayerMask &mask) -> ComponentImage;

struct AggregatedRows {
  ComponentImage image;
  std::vector<int> counts; // masked samples per row
};

auto aggregate_rows(const ComponentImage &comp, const LayerMask &mask) -> AggregatedRows;
auto deaggregate_rows(const ComponentImage &aggregated, const LayerMask &mask) -> ComponentImage;

// Which samples of a coded plane a re-encoder derives from the decoded ones. Decoding with them
// makes the derived samples repeat what the encoder will compute. fill_ties covers layer 0
// after fill_uncovered, aggregate_ties the row padding, residual_ties a residual against `base`
// whose unmasked cells are zero and whose sums with `base` stay in range.
auto fill_ties(const LayerMask &mask, ComponentKind kind) -> SampleTies;
auto aggregate_ties(const LayerMask &mask, ComponentKind kind) -> SampleTies;
auto residual_ties(const LayerMask &mask, const ComponentImage &base) -> SampleTies;

auto encode_component(const ComponentImage &comp, const CoderQuality &quality)
    -> std::vector<std::uint8_t>;
auto decode_component(std::span<const std::uint8_t> bits, ComponentKind kind, int layer, int width,
                      int height, const CoderQuality &quality, bool residual = false,
                      std::size_t baseOffset = 0, const SampleTies *ties = nullptr)
    -> ComponentImage;

enum class RateStatus : std::uint8_t { Reached, UnderBudget, OverBudget };

struct RateControlResult {
  CoderQuality quality;
  double achieved_bpp{0.0};
  RateStatus status{RateStatus::Reached};
};

// Bisection on log q (at most 20 probes) for the finest q whose stream fits
// bpp_target * 1.05. Saturates at kFinestQuality (UnderBudget) or kCoarsestQuality
// (OverBudget).
auto rate_control(const ComponentImage &comp, double bppTarget) -> RateControlResult;

} // namespace ldinav
