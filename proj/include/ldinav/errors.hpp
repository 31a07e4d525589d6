#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ldinav {

// Invalid arguments are reported with std::invalid_argument.

class LoadError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class BuildError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DecodeError : public std::runtime_error {
public:
  DecodeError(const std::string &what, std::size_t byteOffset)
      : std::runtime_error{what + " (at byte " + std::to_string(byteOffset) + ")"},
        m_byteOffset{byteOffset} {}

  [[nodiscard]] auto byte_offset() const noexcept -> std::size_t { return m_byteOffset; }

private:
  std::size_t m_byteOffset;
};

} // namespace ldinav
