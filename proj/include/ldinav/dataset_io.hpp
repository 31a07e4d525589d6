#pragma once

#include <ldinav/dataset.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ldinav {

// On-disk layout of a dataset directory:
//   cameras.txt     calibration, see write_calibration
//   view_<k>.png    8-bit RGB
//   depth_<k>.pgm   16-bit binary PGM (maxval 65535, big-endian) of inverse-depth codes.
//                   Code 0 marks an invalid sample; valid samples that quantize to 0 are
//                   stored as 1.
auto load_dataset(const std::filesystem::path &dir) -> MultiviewDataset;
void write_dataset(const MultiviewDataset &dataset, const std::filesystem::path &dir);

auto parse_calibration(const std::filesystem::path &file) -> std::vector<CameraParams>;
void write_calibration(const std::vector<CameraParams> &cams, const std::filesystem::path &file);

struct RgbImage {
  int width{};
  int height{};
  std::vector<std::uint8_t> rgb; // interleaved, row-major
};

auto read_png(const std::filesystem::path &file) -> RgbImage;
void write_png(const RgbImage &image, const std::filesystem::path &file);
auto encode_png(const RgbImage &image) -> std::vector<std::uint8_t>;

auto read_pgm16(const std::filesystem::path &file) -> Grid<std::uint16_t>;
void write_pgm16(const Grid<std::uint16_t> &image, const std::filesystem::path &file);
void write_pgm8(const Grid<std::uint8_t> &image, const std::filesystem::path &file);

auto to_rgb(const ViewImage &image) -> RgbImage;
auto from_rgb(const RgbImage &image) -> ViewImage;

} // namespace ldinav
