#include <ldinav/bitstream.hpp>
#include <ldinav/errors.hpp>
#include <ldinav/nol_coder.hpp>

#include <algorithm>
#include <array>
#include <cstdlib>

namespace ldinav {

namespace {
constexpr std::array<int, 32> kRunOrder{0, 0, 0, 0, 1, 1, 1,  1,  2,  2,  2,  2,  3,  3,  3,  3,
                                        4, 4, 5, 5, 6, 6, 7,  7,  8,  9,  10, 11, 12, 13, 14, 15};
constexpr int kEscapeLength = 24;
constexpr int kEscapeBits = 16;
constexpr int kContextCount = 125;

struct Stats {
  int A;
  int N{1};
};

struct Neighbours {
  int a, b, c, d;
};

auto neighbours(const Grid<std::uint8_t> &g, int x, int y) -> Neighbours {
  if (y == 0) {
    const int a = x > 0 ? g(x - 1, 0) : 0;
    return {a, a, a, a};
  }
  const int b = g(x, y - 1);
  const int a = x > 0 ? g(x - 1, y) : b;
  const int c = x > 0 ? g(x - 1, y - 1) : b;
  const int d = x + 1 < g.width() ? g(x + 1, y - 1) : b;
  return {a, b, c, d};
}

auto quantize_gradient(int g) -> int { return std::clamp(g, -2, 2); }

auto med(int a, int b, int c) -> int {
  if (c >= std::max(a, b)) {
    return std::min(a, b);
  }
  if (c <= std::min(a, b)) {
    return std::max(a, b);
  }
  return a + b - c;
}

auto rice_parameter(const Stats &s) -> int {
  int k = 0;
  while ((s.N << k) < s.A && k < 16) {
    ++k;
  }
  return k;
}

void update(Stats &s, int error) {
  s.A += std::abs(error);
  if (++s.N == 64) {
    s.A >>= 1;
    s.N >>= 1;
  }
}

auto map_error(int e) -> unsigned { return e >= 0 ? 2U * static_cast<unsigned>(e) : 2U * static_cast<unsigned>(-e) - 1U; }
auto unmap_error(unsigned m) -> int {
  return (m & 1U) != 0 ? -static_cast<int>((m + 1) / 2) : static_cast<int>(m / 2);
}

// Reduce a prediction error modulo the alphabet size into [-range/2, range/2).
auto reduce(int e, int range) -> int {
  if (e < 0) {
    e += range;
  }
  if (e >= (range + 1) / 2) {
    e -= range;
  }
  return e;
}

void put_rice(BitWriter &out, unsigned m, int k) {
  const unsigned q = m >> k;
  if (q < kEscapeLength) {
    out.put_bits(0, static_cast<int>(q));
    out.put_bit(true);
    out.put_bits(m & ((1U << k) - 1U), k);
  } else {
    out.put_bits(0, kEscapeLength);
    out.put_bit(true);
    out.put_bits(m, kEscapeBits);
  }
}

auto get_rice(BitReader &in, int k) -> unsigned {
  unsigned q = 0;
  while (!in.get_bit()) {
    if (++q > kEscapeLength) {
      in.fail("Golomb-Rice prefix too long");
    }
  }
  if (q == kEscapeLength) {
    return static_cast<unsigned>(in.get_bits(kEscapeBits));
  }
  return (q << k) | static_cast<unsigned>(in.get_bits(k));
}

struct Context {
  int index;
  int sign;
  bool run;
};

auto classify(const Neighbours &n) -> Context {
  int q1 = quantize_gradient(n.d - n.b);
  int q2 = quantize_gradient(n.b - n.c);
  int q3 = quantize_gradient(n.c - n.a);
  if (q1 == 0 && q2 == 0 && q3 == 0) {
    return {0, 1, true};
  }
  int sign = 1;
  if (q1 < 0 || (q1 == 0 && (q2 < 0 || (q2 == 0 && q3 < 0)))) {
    sign = -1;
    q1 = -q1;
    q2 = -q2;
    q3 = -q3;
  }
  return {(q1 + 2) * 25 + (q2 + 2) * 5 + (q3 + 2), sign, false};
}

class CoderState {
public:
  explicit CoderState(int range) {
    const int a0 = std::max(2, (range + 32) / 64);
    m_regular.fill(Stats{a0});
    m_interrupt.fill(Stats{a0});
  }

  std::array<Stats, kContextCount> m_regular;
  std::array<Stats, 2> m_interrupt;
  int m_runIndex{0};
};
} // namespace

auto encode_nol(const Grid<std::uint8_t> &nol) -> std::vector<std::uint8_t> {
  BitWriter out;
  const int maxval = nol.empty() ? 0 : *std::max_element(nol.begin(), nol.end());
  const int range = maxval + 1;
  out.put_bits(static_cast<std::uint64_t>(maxval), 8);
  CoderState state{range};

  for (int y = 0; y < nol.height(); ++y) {
    int x = 0;
    while (x < nol.width()) {
      const auto n = neighbours(nol, x, y);
      const auto ctx = classify(n);
      if (!ctx.run) {
        const int pred = med(n.a, n.b, n.c);
        const int e = reduce(ctx.sign * (nol(x, y) - pred), range);
        auto &stats = state.m_regular[static_cast<std::size_t>(ctx.index)];
        put_rice(out, map_error(e), rice_parameter(stats));
        update(stats, e);
        ++x;
        continue;
      }

      const int runValue = n.a;
      int count = 0;
      while (x + count < nol.width() && nol(x + count, y) == runValue) {
        ++count;
      }
      const bool endOfLine = x + count == nol.width();
      int remaining = count;
      while (remaining >= (1 << kRunOrder[static_cast<std::size_t>(state.m_runIndex)])) {
        out.put_bit(true);
        remaining -= 1 << kRunOrder[static_cast<std::size_t>(state.m_runIndex)];
        state.m_runIndex = std::min(state.m_runIndex + 1, 31);
      }
      x += count;
      if (endOfLine) {
        if (remaining > 0) {
          out.put_bit(true);
        }
        continue;
      }
      out.put_bit(false);
      out.put_bits(static_cast<std::uint64_t>(remaining),
                   kRunOrder[static_cast<std::size_t>(state.m_runIndex)]);
      state.m_runIndex = std::max(state.m_runIndex - 1, 0);

      // Run interruption sample.
      const auto ni = neighbours(nol, x, y);
      const bool flat = ni.a == ni.b;
      const int pred = flat ? ni.a : ni.b;
      const int e = reduce(nol(x, y) - pred, range);
      auto &stats = state.m_interrupt[flat ? 1 : 0];
      put_rice(out, map_error(e), rice_parameter(stats));
      update(stats, e);
      ++x;
    }
  }
  return out.finish();
}

auto decode_nol(std::span<const std::uint8_t> bits, int width, int height, std::size_t baseOffset)
    -> Grid<std::uint8_t> {
  BitReader in{bits, baseOffset};
  Grid<std::uint8_t> nol{width, height, 0};
  const int maxval = static_cast<int>(in.get_bits(8));
  const int range = maxval + 1;
  CoderState state{range};

  const auto store = [&](int x, int y, int value) {
    if (value < 0 || value > maxval) {
      in.fail("decoded layer count out of range");
    }
    nol(x, y) = static_cast<std::uint8_t>(value);
  };
  const auto wrap = [range](int v) { return ((v % range) + range) % range; };

  for (int y = 0; y < height; ++y) {
    int x = 0;
    while (x < width) {
      const auto n = neighbours(nol, x, y);
      const auto ctx = classify(n);
      if (!ctx.run) {
        const int pred = med(n.a, n.b, n.c);
        auto &stats = state.m_regular[static_cast<std::size_t>(ctx.index)];
        const int e = unmap_error(get_rice(in, rice_parameter(stats)));
        if (e < -(range / 2) - 1 || e > range) {
          in.fail("prediction error out of range");
        }
        store(x, y, wrap(pred + ctx.sign * e));
        update(stats, e);
        ++x;
        continue;
      }

      const int runValue = n.a;
      bool endOfLine = false;
      while (in.get_bit()) {
        const int segment = 1 << kRunOrder[static_cast<std::size_t>(state.m_runIndex)];
        const int count = std::min(segment, width - x);
        for (int i = 0; i < count; ++i) {
          store(x + i, y, runValue);
        }
        x += count;
        if (count == segment) {
          state.m_runIndex = std::min(state.m_runIndex + 1, 31);
        }
        if (x == width) {
          endOfLine = true;
          break;
        }
      }
      if (endOfLine) {
        continue;
      }
      const int tail = static_cast<int>(
          in.get_bits(kRunOrder[static_cast<std::size_t>(state.m_runIndex)]));
      if (x + tail >= width) {
        in.fail("run length past end of line");
      }
      for (int i = 0; i < tail; ++i) {
        store(x + i, y, runValue);
      }
      x += tail;
      state.m_runIndex = std::max(state.m_runIndex - 1, 0);

      const auto ni = neighbours(nol, x, y);
      const bool flat = ni.a == ni.b;
      const int pred = flat ? ni.a : ni.b;
      auto &stats = state.m_interrupt[flat ? 1 : 0];
      const int e = unmap_error(get_rice(in, rice_parameter(stats)));
      store(x, y, wrap(pred + e));
      update(stats, e);
      ++x;
    }
  }
  return nol;
}

} // namespace ldinav
