#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ldinav {

// MSB-first bit packing with Exp-Golomb helpers.
class BitWriter {
public:
  void put_bit(bool bit);
  void put_bits(std::uint64_t value, int count);
  void put_ue(std::uint64_t value);
  void put_se(std::int64_t value);
  /// Pads with zero bits to a byte boundary and returns the buffer.
  auto finish() -> std::vector<std::uint8_t>;
  [[nodiscard]] auto bit_count() const noexcept -> std::size_t { return m_bits; }

private:
  std::vector<std::uint8_t> m_bytes;
  std::size_t m_bits{0};
};

// Reading past the end throws DecodeError carrying the byte offset.
class BitReader {
public:
  explicit BitReader(std::span<const std::uint8_t> bytes, std::size_t baseOffset = 0)
      : m_bytes{bytes}, m_baseOffset{baseOffset} {}

  auto get_bit() -> bool;
  auto get_bits(int count) -> std::uint64_t;
  auto get_ue() -> std::uint64_t;
  auto get_se() -> std::int64_t;
  [[nodiscard]] auto byte_offset() const noexcept -> std::size_t {
    return m_baseOffset + m_pos / 8;
  }
  [[noreturn]] void fail(const std::string &what) const;

private:
  std::span<const std::uint8_t> m_bytes;
  std::size_t m_baseOffset;
  std::size_t m_pos{0};
};

// Little-endian fixed-width fields for the container.
class ByteWriter {
public:
  void u8(std::uint8_t v) { m_bytes.push_back(v); }
  void u32(std::uint32_t v);
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v);
  void raw(std::span<const std::uint8_t> bytes);
  [[nodiscard]] auto bytes() const noexcept -> const std::vector<std::uint8_t> & { return m_bytes; }
  auto take() -> std::vector<std::uint8_t> { return std::move(m_bytes); }

private:
  std::vector<std::uint8_t> m_bytes;
};

class ByteReader {
public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : m_bytes{bytes} {}

  auto u8() -> std::uint8_t;
  auto u32() -> std::uint32_t;
  auto i32() -> std::int32_t { return static_cast<std::int32_t>(u32()); }
  auto f64() -> double;
  auto raw(std::size_t count) -> std::span<const std::uint8_t>;
  [[nodiscard]] auto offset() const noexcept -> std::size_t { return m_pos; }
  [[nodiscard]] auto remaining() const noexcept -> std::size_t { return m_bytes.size() - m_pos; }

private:
  void need(std::size_t count) const;

  std::span<const std::uint8_t> m_bytes;
  std::size_t m_pos{0};
};

auto crc32(std::span<const std::uint8_t> bytes) -> std::uint32_t;

} // namespace ldinav
