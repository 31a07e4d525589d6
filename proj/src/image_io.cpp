#include <ldinav/dataset_io.hpp>
#include <ldinav/errors.hpp>

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

namespace ldinav {

auto read_png(const std::filesystem::path &file) -> RgbImage {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, file.c_str()) == 0) {
    throw LoadError{file.string() + ": " + image.message};
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out{static_cast<int>(image.width), static_cast<int>(image.height), {}};
  out.rgb.resize(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, out.rgb.data(), 0, nullptr) == 0) {
    const std::string message = image.message;
    png_image_free(&image);
    throw LoadError{file.string() + ": " + message};
  }
  return out;
}

auto encode_png(const RgbImage &rgb) -> std::vector<std::uint8_t> {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(rgb.width);
  image.height = static_cast<png_uint_32>(rgb.height);
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (png_image_write_to_memory(&image, nullptr, &size, 0, rgb.rgb.data(), 0, nullptr) == 0) {
    throw std::runtime_error{std::string{"png encode failed: "} + image.message};
  }
  std::vector<std::uint8_t> bytes(size);
  if (png_image_write_to_memory(&image, bytes.data(), &size, 0, rgb.rgb.data(), 0, nullptr) ==
      0) {
    throw std::runtime_error{std::string{"png encode failed: "} + image.message};
  }
  bytes.resize(size);
  return bytes;
}

void write_png(const RgbImage &image, const std::filesystem::path &file) {
  const auto bytes = encode_png(image);
  std::ofstream out{file, std::ios::binary};
  if (!out) {
    throw std::runtime_error{"cannot write " + file.string()};
  }
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

namespace {
// Reads one whitespace-delimited header token, skipping '#' comments.
auto pgm_token(std::istream &in, const std::filesystem::path &file) -> std::string {
  std::string token;
  while (in) {
    const int c = in.get();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(c) != 0 || c == EOF) {
      if (!token.empty()) {
        return token;
      }
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  throw LoadError{file.string() + ": truncated PGM header"};
}
} // namespace

auto read_pgm16(const std::filesystem::path &file) -> Grid<std::uint16_t> {
  std::ifstream in{file, std::ios::binary};
  if (!in) {
    throw LoadError{file.string() + ": cannot open"};
  }
  if (pgm_token(in, file) != "P5") {
    throw LoadError{file.string() + ": not a binary PGM (P5)"};
  }
  int width = 0;
  int height = 0;
  int maxval = 0;
  try {
    width = std::stoi(pgm_token(in, file));
    height = std::stoi(pgm_token(in, file));
    maxval = std::stoi(pgm_token(in, file));
  } catch (const std::logic_error &) {
    throw LoadError{file.string() + ": malformed PGM header"};
  }
  if (width <= 0 || height <= 0 || maxval != 65535) {
    throw LoadError{file.string() + ": expected 16-bit PGM with maxval 65535"};
  }
  Grid<std::uint16_t> out{width, height, 0};
  std::vector<unsigned char> raw(out.size() * 2);
  in.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw LoadError{file.string() + ": truncated PGM data"};
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  }
  return out;
}

void write_pgm16(const Grid<std::uint16_t> &image, const std::filesystem::path &file) {
  std::ofstream out{file, std::ios::binary};
  if (!out) {
    throw std::runtime_error{"cannot write " + file.string()};
  }
  out << "P5\n" << image.width() << ' ' << image.height() << "\n65535\n";
  std::vector<char> raw(image.size() * 2);
  for (std::size_t i = 0; i < image.size(); ++i) {
    raw[2 * i] = static_cast<char>(image.data()[i] >> 8);
    raw[2 * i + 1] = static_cast<char>(image.data()[i] & 0xFF);
  }
  out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
}

void write_pgm8(const Grid<std::uint8_t> &image, const std::filesystem::path &file) {
  std::ofstream out{file, std::ios::binary};
  if (!out) {
    throw std::runtime_error{"cannot write " + file.string()};
  }
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char *>(image.data().data()),
            static_cast<std::streamsize>(image.size()));
}

} // namespace ldinav
