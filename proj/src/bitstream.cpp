#include <ldinav/bitstream.hpp>
#include <ldinav/errors.hpp>

#include <zlib.h>

#include <bit>
#include <cstring>

namespace ldinav {

void BitWriter::put_bit(bool bit) {
  if (m_bits % 8 == 0) {
    m_bytes.push_back(0);
  }
  if (bit) {
    m_bytes.back() |= static_cast<std::uint8_t>(0x80U >> (m_bits % 8));
  }
  ++m_bits;
}

void BitWriter::put_bits(std::uint64_t value, int count) {
  for (int i = count - 1; i >= 0; --i) {
    put_bit(((value >> i) & 1U) != 0);
  }
}

void BitWriter::put_ue(std::uint64_t value) {
  const std::uint64_t coded = value + 1;
  const int length = std::bit_width(coded);
  put_bits(0, length - 1);
  put_bits(coded, length);
}

void BitWriter::put_se(std::int64_t value) {
  put_ue(value > 0 ? 2 * static_cast<std::uint64_t>(value) - 1
                   : 2 * static_cast<std::uint64_t>(-value));
}

auto BitWriter::finish() -> std::vector<std::uint8_t> { return std::move(m_bytes); }

void BitReader::fail(const std::string &what) const { throw DecodeError{what, byte_offset()}; }

auto BitReader::get_bit() -> bool {
  if (m_pos >= m_bytes.size() * 8) {
    fail("bitstream truncated");
  }
  const bool bit = ((m_bytes[m_pos / 8] >> (7 - m_pos % 8)) & 1U) != 0;
  ++m_pos;
  return bit;
}

auto BitReader::get_bits(int count) -> std::uint64_t {
  std::uint64_t value = 0;
  for (int i = 0; i < count; ++i) {
    value = (value << 1) | (get_bit() ? 1U : 0U);
  }
  return value;
}

auto BitReader::get_ue() -> std::uint64_t {
  int zeros = 0;
  while (!get_bit()) {
    if (++zeros > 40) {
      fail("invalid Exp-Golomb prefix");
    }
  }
  return ((std::uint64_t{1} << zeros) | get_bits(zeros)) - 1;
}

auto BitReader::get_se() -> std::int64_t {
  const std::uint64_t k = get_ue();
  return (k & 1U) != 0 ? static_cast<std::int64_t>((k + 1) / 2)
                       : -static_cast<std::int64_t>(k / 2);
}

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    m_bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

void ByteWriter::f64(double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    m_bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
}

void ByteWriter::raw(std::span<const std::uint8_t> bytes) {
  m_bytes.insert(m_bytes.end(), bytes.begin(), bytes.end());
}

void ByteReader::need(std::size_t count) const {
  if (m_bytes.size() - m_pos < count) {
    throw DecodeError{"container truncated", m_pos};
  }
}

auto ByteReader::u8() -> std::uint8_t {
  need(1);
  return m_bytes[m_pos++];
}

auto ByteReader::u32() -> std::uint32_t {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(m_bytes[m_pos++]) << (8 * i);
  }
  return v;
}

auto ByteReader::f64() -> double {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(m_bytes[m_pos++]) << (8 * i);
  }
  return std::bit_cast<double>(v);
}

auto ByteReader::raw(std::size_t count) -> std::span<const std::uint8_t> {
  need(count);
  const auto out = m_bytes.subspan(m_pos, count);
  m_pos += count;
  return out;
}

auto crc32(std::span<const std::uint8_t> bytes) -> std::uint32_t {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

} // namespace ldinav
