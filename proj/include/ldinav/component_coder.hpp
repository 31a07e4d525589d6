#pragma once

#include <ldinav/grid.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace ldinav {

// Sample range and quantizer step of one plane. Samples are level-shifted by the range
// midpoint before the transform, so residual planes centred on zero get no shift.
struct PlaneFormat {
  std::int32_t min_value{0};
  std::int32_t max_value{255};
  double step{1.0};

  [[nodiscard]] auto level_shift() const noexcept -> std::int32_t {
    return (min_value + max_value + 1) / 2;
  }
};

// How a re-encoder derives each sample from the decoded plane. A sample whose `source` is its
// own index is free and kept within [lower, upper]. Any other non-negative `source` names the
// free sample it copies. A source of -1 means the value `fixed`.
struct SampleTies {
  Grid<std::int32_t> source;
  Grid<std::int32_t> fixed;
  Grid<std::int32_t> lower;
  Grid<std::int32_t> upper;
};

// Lossy rectangular still-image coder. Implementations must be deterministic: identical
// plane and format always give identical bytes.
class ComponentCoder {
public:
  ComponentCoder() = default;
  ComponentCoder(const ComponentCoder &) = delete;
  auto operator=(const ComponentCoder &) -> ComponentCoder & = delete;
  virtual ~ComponentCoder() = default;

  [[nodiscard]] virtual auto encode(const Grid<std::int32_t> &plane, const PlaneFormat &format) const
      -> std::vector<std::uint8_t> = 0;
  [[nodiscard]] virtual auto decode(std::span<const std::uint8_t> bits, int width, int height,
                                    const PlaneFormat &format, std::size_t baseOffset = 0,
                                    const SampleTies *ties = nullptr) const
      -> Grid<std::int32_t> = 0;
};

// 8x8 DCT-II, flat uniform quantizer, zigzag scan, zero-run/level pairs with signed
// Exp-Golomb codes. The DC level is coded as a difference from the previous block. Decoding
// searches each block for integer samples, tied as `ties` requires, that quantize back to the
// coded levels.
class BlockDctCoder final : public ComponentCoder {
public:
  [[nodiscard]] auto encode(const Grid<std::int32_t> &plane, const PlaneFormat &format) const
      -> std::vector<std::uint8_t> override;
  [[nodiscard]] auto decode(std::span<const std::uint8_t> bits, int width, int height,
                            const PlaneFormat &format, std::size_t baseOffset = 0,
                            const SampleTies *ties = nullptr) const
      -> Grid<std::int32_t> override;
};

auto default_component_coder() -> const ComponentCoder &;

} // namespace ldinav
