#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace ldinav {

/// Row-major 2-D array. Element (x, y) is column x of row y.
template <typename T> class Grid {
public:
  Grid() = default;
  Grid(int width, int height, const T &fill = T{})
      : m_width{width}, m_height{height},
        m_data(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  [[nodiscard]] auto width() const noexcept -> int { return m_width; }
  [[nodiscard]] auto height() const noexcept -> int { return m_height; }
  [[nodiscard]] auto size() const noexcept -> std::size_t { return m_data.size(); }
  [[nodiscard]] auto empty() const noexcept -> bool { return m_data.empty(); }

  [[nodiscard]] auto contains(int x, int y) const noexcept -> bool {
    return 0 <= x && x < m_width && 0 <= y && y < m_height;
  }

  auto operator()(int x, int y) -> T & {
    assert(contains(x, y));
    return m_data[index(x, y)];
  }
  auto operator()(int x, int y) const -> const T & {
    assert(contains(x, y));
    return m_data[index(x, y)];
  }

  auto data() noexcept -> std::vector<T> & { return m_data; }
  [[nodiscard]] auto data() const noexcept -> const std::vector<T> & { return m_data; }

  auto begin() noexcept { return m_data.begin(); }
  auto end() noexcept { return m_data.end(); }
  [[nodiscard]] auto begin() const noexcept { return m_data.begin(); }
  [[nodiscard]] auto end() const noexcept { return m_data.end(); }

  friend auto operator==(const Grid &, const Grid &) -> bool = default;

private:
  [[nodiscard]] auto index(int x, int y) const noexcept -> std::size_t {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(m_width) +
           static_cast<std::size_t>(x);
  }

  int m_width{};
  int m_height{};
  std::vector<T> m_data;
};

} // namespace ldinav
