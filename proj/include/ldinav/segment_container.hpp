#pragma once

#include <ldinav/ldi_build.hpp>
#include <ldinav/ldi_codec.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ldinav {

enum class Preprocess : std::uint8_t { Fill = 0, Aggregate = 1 };

// XLDI container, all fields little-endian:
//   "XLDI", u8 version (1)
//   header: f64 fx fy cx cy, f64 R[9] row-major, f64 t[3], f64 z_near z_far,
//           u32 ext_width ext_height (also the camera sensor size), i32 origin_dx origin_dy,
//           u8 layers, f64 q_color, f64 bpp_color_target (0 = none), u8 preprocess
//   u32 stream count, then per stream: u8 layer, u8 component kind, u32 length
//   streams concatenated (NOL first, then Y Cb Cr D for layers 0, 1, ...)
//   u32 CRC-32 of the concatenated streams
// With a bpp target, each component stream starts with the f64 quantizer q chosen for it.
// Without one, every stream uses q_color and carries no prefix.
// In fill mode, layers above 0 are coded as the difference from the reconstructed layer 0.
inline constexpr std::uint8_t kContainerVersion = 1;

struct SegmentHeader {
  CameraParams ref_cam;
  int ext_width{0};
  int ext_height{0};
  int origin_dx{0};
  int origin_dy{0};
  int layers{0};
  double z_near{0.0};
  double z_far{0.0};
  double q_color{0.0};
  double bpp_color_target{0.0};
  Preprocess preprocess{Preprocess::Fill};
};

struct StreamInfo {
  int layer{0};
  ComponentKind kind{ComponentKind::Nol};
  std::size_t offset{0}; // from the start of the container
  std::size_t length{0};
  double q{0.0};         // component streams only
};

struct EncodedSegment {
  SegmentHeader header;
  std::vector<StreamInfo> streams;
  std::vector<std::uint8_t> bytes;

  [[nodiscard]] auto total_bits() const noexcept -> std::size_t { return bytes.size() * 8; }
  [[nodiscard]] auto payload_size() const noexcept -> std::size_t;
  [[nodiscard]] auto stream(const StreamInfo &info) const -> std::span<const std::uint8_t> {
    return std::span{bytes}.subspan(info.offset, info.length);
  }
  /// Size in bytes of all streams of the given layer and kind (0 if absent).
  [[nodiscard]] auto stream_size(int layer, ComponentKind kind) const -> std::size_t;
};

auto encode_segment(const ExtendedLdi &ldi, const CoderQuality &quality,
                    Preprocess preprocess = Preprocess::Fill) -> EncodedSegment;

/// Validates magic, version, stream table and CRC. Throws DecodeError.
auto parse_segment(std::vector<std::uint8_t> bytes) -> EncodedSegment;

auto decode_segment(const EncodedSegment &segment) -> ExtendedLdi;

} // namespace ldinav
