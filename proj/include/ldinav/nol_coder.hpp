#pragma once

#include <ldinav/grid.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace ldinav {

// Lossless predictive coder for the per-pixel layer-count image, in the style of LOCO-I:
// median edge detector prediction, 125 gradient contexts with adaptive Golomb-Rice
// parameters, and a run mode for flat areas.
auto encode_nol(const Grid<std::uint8_t> &nol) -> std::vector<std::uint8_t>;
auto decode_nol(std::span<const std::uint8_t> bits, int width, int height,
                std::size_t baseOffset = 0) -> Grid<std::uint8_t>;

} // namespace ldinav
