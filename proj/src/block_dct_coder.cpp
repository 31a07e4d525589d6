#include <ldinav/bitstream.hpp>
#include <ldinav/component_coder.hpp>
#include <ldinav/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace ldinav {

namespace {
constexpr int kBlock = 8;

using Block = std::array<double, kBlock * kBlock>;

auto dct_matrix() -> const Block & {
  static const Block table = [] {
    Block c{};
    for (int k = 0; k < kBlock; ++k) {
      const double alpha = k == 0 ? std::sqrt(1.0 / kBlock) : std::sqrt(2.0 / kBlock);
      for (int n = 0; n < kBlock; ++n) {
        c[static_cast<std::size_t>(k * kBlock + n)] =
            alpha * std::cos((2 * n + 1) * k * std::numbers::pi / (2.0 * kBlock));
      }
    }
    return c;
  }();
  return table;
}

constexpr auto zigzag_order() -> std::array<int, kBlock * kBlock> {
  std::array<int, kBlock * kBlock> order{};
  int i = 0;
  for (int s = 0; s < 2 * kBlock - 1; ++s) {
    for (int j = 0; j < kBlock; ++j) {
      const int row = (s % 2 == 0) ? s - j : j;
      const int col = s - row;
      if (row >= 0 && row < kBlock && col >= 0 && col < kBlock) {
        order[static_cast<std::size_t>(i++)] = row * kBlock + col;
      }
    }
  }
  return order;
}

constexpr auto kZigzag = zigzag_order();

// out = C * in * C^T (forward) or C^T * in * C (inverse)
auto transform(const Block &in, bool inverse) -> Block {
  const auto &c = dct_matrix();
  const auto C = [&](int r, int k) {
    return inverse ? c[static_cast<std::size_t>(k * kBlock + r)]
                   : c[static_cast<std::size_t>(r * kBlock + k)];
  };
  Block tmp{};
  for (int r = 0; r < kBlock; ++r) {
    for (int col = 0; col < kBlock; ++col) {
      double acc = 0.0;
      for (int k = 0; k < kBlock; ++k) {
        acc += C(r, k) * in[static_cast<std::size_t>(k * kBlock + col)];
      }
      tmp[static_cast<std::size_t>(r * kBlock + col)] = acc;
    }
  }
  Block out{};
  for (int r = 0; r < kBlock; ++r) {
    for (int col = 0; col < kBlock; ++col) {
      double acc = 0.0;
      for (int k = 0; k < kBlock; ++k) {
        acc += tmp[static_cast<std::size_t>(r * kBlock + k)] * C(col, k);
      }
      out[static_cast<std::size_t>(r * kBlock + col)] = acc;
    }
  }
  return out;
}

auto padded(int n) -> int { return (n + kBlock - 1) / kBlock * kBlock; }

constexpr int kMaxAdjustments = 64;
constexpr int kMaxTieRounds = 8;
constexpr int kMaxLatticeNodes = 1 << 16;
constexpr int kUnlinked = -1;

// How the samples of one block are derived. A free sample links to itself, a copy links to the
// free sample it repeats, and an unlinked sample holds a fixed value. Values are level-shifted.
struct BlockLinks {
  std::array<int, kBlock * kBlock> link{};
  Block fixed{};
  Block lower{};
  Block upper{};

  [[nodiscard]] auto free(std::size_t k) const -> bool {
    return link[k] == static_cast<int>(k);
  }
};

// Positions past the image edge repeat the edge, as the encoder pads.
auto edge_links(const PlaneFormat &format, int cols, int rows) -> BlockLinks {
  BlockLinks links;
  const double shift = format.level_shift();
  for (int y = 0; y < kBlock; ++y) {
    for (int x = 0; x < kBlock; ++x) {
      const auto j = static_cast<std::size_t>(y * kBlock + x);
      links.link[j] = std::min(y, rows - 1) * kBlock + std::min(x, cols - 1);
      links.lower[j] = format.min_value - shift;
      links.upper[j] = format.max_value - shift;
    }
  }
  return links;
}

auto expand(const BlockLinks &links, const Block &values) -> Block {
  Block samples{};
  for (std::size_t j = 0; j < samples.size(); ++j) {
    samples[j] = links.link[j] == kUnlinked ? links.fixed[j]
                                            : values[static_cast<std::size_t>(links.link[j])];
  }
  return samples;
}

auto round_block(const Block &centre, const PlaneFormat &format, const BlockLinks &links)
    -> Block {
  const double shift = format.level_shift();
  const Block real = transform(centre, true);
  Block values{};
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (links.free(k)) {
      values[k] =
          std::clamp(std::floor(real[k] + shift + 0.5) - shift, links.lower[k], links.upper[k]);
    }
  }
  return expand(links, values);
}

auto coefficient_error(const Block &samples, const Block &centre) -> Block {
  Block error = transform(samples, false);
  for (std::size_t i = 0; i < error.size(); ++i) {
    error[i] -= centre[i];
  }
  return error;
}

// Same arithmetic as the encoder, so a coefficient on a cell boundary is judged as it rounds.
auto requantizes(const Block &samples, const Block &centre, double step) -> bool {
  const Block coeffs = transform(samples, false);
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (std::llround(coeffs[i] / step) != std::llround(centre[i] / step)) {
      return false;
    }
  }
  return true;
}

// Coefficient response to a unit step of each free sample, copies included.
struct FreeResponse {
  std::vector<std::size_t> samples;
  std::vector<Block> response;
};

auto free_response(const BlockLinks &links) -> FreeResponse {
  FreeResponse out;
  for (std::size_t k = 0; k < links.link.size(); ++k) {
    if (!links.free(k)) {
      continue;
    }
    Block impulse{};
    for (std::size_t j = 0; j < impulse.size(); ++j) {
      impulse[j] = links.link[j] == static_cast<int>(k) ? 1.0 : 0.0;
    }
    out.samples.push_back(k);
    out.response.push_back(transform(impulse, false));
  }
  return out;
}

// Real free values whose block is nearest `centre` with copies and fixed samples in place.
auto least_squares(const Block &centre, const BlockLinks &links, const FreeResponse &free)
    -> Eigen::VectorXd {
  const auto n = static_cast<Eigen::Index>(free.samples.size());
  Eigen::MatrixXd A{kBlock * kBlock, n};
  for (Eigen::Index f = 0; f < n; ++f) {
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      A(i, f) = free.response[static_cast<std::size_t>(f)][static_cast<std::size_t>(i)];
    }
  }
  const Block fixedPart = transform(expand(links, Block{}), false);
  Eigen::VectorXd rhs{A.rows()};
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    rhs(i) = centre[static_cast<std::size_t>(i)] - fixedPart[static_cast<std::size_t>(i)];
  }
  return A.colPivHouseholderQr().solve(rhs);
}

// Integer block from real free values rounded to nearest.
auto rounded(const BlockLinks &links, const FreeResponse &free, const Eigen::VectorXd &values)
    -> Block {
  Block out{};
  for (std::size_t f = 0; f < free.samples.size(); ++f) {
    const std::size_t k = free.samples[f];
    out[k] = std::clamp(std::floor(values(static_cast<Eigen::Index>(f)) + 0.5), links.lower[k],
                        links.upper[k]);
  }
  return expand(links, out);
}

// Depth-first search over rounding each free sample of the least-squares solution down or up,
// nearer choice first. A branch is cut once some coefficient can no longer reach its cell
// whatever the remaining samples do. The node budget bounds the work on large blocks.
auto lattice_search(const Block &centre, const PlaneFormat &format, const BlockLinks &links,
                    const FreeResponse &free, const Eigen::VectorXd &ideal)
    -> std::optional<Block> {
  struct Choice {
    std::size_t free;
    double first;
    double second;
    bool both;
  };
  std::vector<Choice> choices;
  Block values{};
  for (std::size_t f = 0; f < free.samples.size(); ++f) {
    const std::size_t k = free.samples[f];
    const double v = ideal(static_cast<Eigen::Index>(f));
    const double down = std::clamp(std::floor(v), links.lower[k], links.upper[k]);
    const double up = std::clamp(std::floor(v) + 1.0, links.lower[k], links.upper[k]);
    const bool upFirst = v - std::floor(v) > 0.5;
    choices.push_back({f, upFirst ? up : down, upFirst ? down : up, up != down});
    values[k] = choices.back().first;
  }
  // Wide alternatives first, so cuts come early.
  std::stable_sort(choices.begin(), choices.end(), [&](const Choice &a, const Choice &b) {
    const auto weight = [&](const Choice &c) {
      double sum = 0.0;
      for (const double r : free.response[c.free]) {
        sum += r * r;
      }
      return c.both ? sum : 0.0;
    };
    return weight(a) > weight(b);
  });

  const std::size_t n = choices.size();
  const double slack = 1e-9 * format.step;
  // Reach of the samples from depth d on, relative to their first choice.
  std::vector<Block> below(n + 1, Block{});
  std::vector<Block> above(n + 1, Block{});
  for (std::size_t d = n; d-- > 0;) {
    const Choice &c = choices[d];
    const double delta = c.second - c.first;
    for (std::size_t i = 0; i < centre.size(); ++i) {
      const double r = c.both ? delta * free.response[c.free][i] : 0.0;
      below[d][i] = below[d + 1][i] + std::min(0.0, r);
      above[d][i] = above[d + 1][i] + std::max(0.0, r);
    }
  }

  int nodes = 0;
  std::optional<Block> found;
  const auto search = [&](const auto &self, std::size_t d, const Block &coeffs) -> void {
    if (found || ++nodes > kMaxLatticeNodes) {
      return;
    }
    for (std::size_t i = 0; i < centre.size(); ++i) {
      const double lo = centre[i] - 0.5 * format.step - slack;
      const double hi = centre[i] + 0.5 * format.step + slack;
      if (coeffs[i] + below[d][i] > hi || coeffs[i] + above[d][i] < lo) {
        return;
      }
    }
    if (d == n) {
      const Block candidate = expand(links, values);
      if (requantizes(candidate, centre, format.step)) {
        found = candidate;
      }
      return;
    }
    const Choice &c = choices[d];
    const std::size_t k = free.samples[c.free];
    self(self, d + 1, coeffs);
    if (c.both && !found) {
      values[k] = c.second;
      Block moved = coeffs;
      for (std::size_t i = 0; i < moved.size(); ++i) {
        moved[i] += (c.second - c.first) * free.response[c.free][i];
      }
      self(self, d + 1, moved);
      values[k] = c.first;
    }
  };
  search(search, 0, transform(expand(links, values), false));
  return found;
}

// Single-sample steps of +-1, each reducing the overshoot outside the cells most. A local
// minimum for single steps can still yield to a step of two samples at once.
auto greedy_search(const Block &centre, const PlaneFormat &format, const BlockLinks &links,
                   const FreeResponse &free, Block samples) -> Block {
  Block error = coefficient_error(samples, centre);
  const double target = 0.45 * format.step;
  const auto overshoot = [&](const Block &e) {
    double sum = 0.0;
    for (const double v : e) {
      const double over = std::max(0.0, std::abs(v) - target);
      sum += over * over;
    }
    return sum;
  };
  const auto movable = [&](std::size_t f, double delta) {
    const double value = samples[free.samples[f]] + delta;
    return value >= links.lower[free.samples[f]] && value <= links.upper[free.samples[f]];
  };
  const auto apply = [&](std::size_t f, double delta) {
    for (std::size_t j = 0; j < samples.size(); ++j) {
      if (links.link[j] == static_cast<int>(free.samples[f])) {
        samples[j] += delta;
      }
    }
    for (std::size_t i = 0; i < error.size(); ++i) {
      error[i] += delta * free.response[f][i];
    }
  };
  const auto cost_of = [&](std::size_t f, double df, std::size_t g, double dg) {
    Block moved = error;
    for (std::size_t i = 0; i < moved.size(); ++i) {
      moved[i] += df * free.response[f][i] + dg * free.response[g][i];
    }
    return overshoot(moved);
  };
  constexpr std::array<double, 2> kDeltas{-1.0, 1.0};
  const std::size_t n = free.samples.size();

  for (int move = 0; move < kMaxAdjustments && !requantizes(samples, centre, format.step); ++move) {
    double best = overshoot(error);
    std::array<std::size_t, 2> bestFree{};
    std::array<double, 2> bestDelta{};
    for (std::size_t f = 0; f < n; ++f) {
      for (const double delta : kDeltas) {
        if (movable(f, delta)) {
          if (const double cost = cost_of(f, delta, f, 0.0); cost < best) {
            best = cost;
            bestFree = {f, f};
            bestDelta = {delta, 0.0};
          }
        }
      }
    }
    for (std::size_t f = 0; f < n && bestDelta[0] == 0.0; ++f) {
      for (std::size_t g = f + 1; g < n; ++g) {
        for (const double df : kDeltas) {
          for (const double dg : kDeltas) {
            if (movable(f, df) && movable(g, dg)) {
              if (const double cost = cost_of(f, df, g, dg); cost < best) {
                best = cost;
                bestFree = {f, g};
                bestDelta = {df, dg};
              }
            }
          }
        }
      }
    }
    if (bestDelta[0] == 0.0) {
      break;
    }
    apply(bestFree[0], bestDelta[0]);
    if (bestDelta[1] != 0.0) {
      apply(bestFree[1], bestDelta[1]);
    }
  }
  return samples;
}

// Integer block, with copies and fixed samples as `links` requires, whose re-quantization
// gives back the dequantized coefficients `centre`. Plain rounding of a smooth block shares one
// rounding error across many pixels, which can move low-frequency coefficients into a
// neighbouring quantizer cell, and ties can hold samples far from the inverse transform. A
// greedy search from `samples` is tried first, then the lattice around the least-squares
// solution, then a greedy search from its rounding. A cell no wider than the
// integer lattice often holds no integer block, so the search is reserved for coarser steps.
auto refine_block(const Block &centre, const PlaneFormat &format, const BlockLinks &links,
                  const Block &samples) -> Block {
  if (format.step <= 1.0 || requantizes(samples, centre, format.step)) {
    return samples;
  }
  const FreeResponse free = free_response(links);
  if (free.samples.empty()) {
    return samples;
  }
  const Block first = greedy_search(centre, format, links, free, samples);
  if (requantizes(first, centre, format.step)) {
    return first;
  }
  const Eigen::VectorXd ideal = least_squares(centre, links, free);
  if (const auto found = lattice_search(centre, format, links, free, ideal)) {
    return *found;
  }
  const Block second = greedy_search(centre, format, links, free, rounded(links, free, ideal));
  return requantizes(second, centre, format.step) ? second : first;
}

auto apply_ties(const Grid<std::int32_t> &plane, const SampleTies &ties) -> Grid<std::int32_t> {
  Grid<std::int32_t> out = plane;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::int32_t s = ties.source.data()[i];
    if (s < 0) {
      out.data()[i] = ties.fixed.data()[i];
    } else {
      const auto src = static_cast<std::size_t>(s);
      out.data()[i] = std::clamp(plane.data()[src], ties.lower.data()[src], ties.upper.data()[src]);
    }
  }
  return out;
}

// Links of the block at (bx, by) under `ties`. Copies of samples in other blocks are fixed at
// their current value in `plane`.
auto tied_links(const SampleTies &ties, const Grid<std::int32_t> &plane, const PlaneFormat &format,
                int bx, int by) -> BlockLinks {
  BlockLinks links;
  const double shift = format.level_shift();
  const int w = plane.width();
  const int h = plane.height();
  const int cols = std::min(kBlock, w - bx);
  const int rows = std::min(kBlock, h - by);
  for (int y = 0; y < kBlock; ++y) {
    for (int x = 0; x < kBlock; ++x) {
      const auto j = static_cast<std::size_t>(y * kBlock + x);
      const int sx = bx + std::min(x, cols - 1);
      const int sy = by + std::min(y, rows - 1);
      const std::int32_t s = ties.source(sx, sy);
      const int tx = s % w;
      const int ty = s / w;
      if (s < 0) {
        links.link[j] = kUnlinked;
        links.fixed[j] = ties.fixed(sx, sy) - shift;
      } else if (tx >= bx && tx < bx + cols && ty >= by && ty < by + rows) {
        links.link[j] = (ty - by) * kBlock + (tx - bx);
      } else {
        links.link[j] = kUnlinked;
        links.fixed[j] = plane(tx, ty) - shift;
      }
      links.lower[j] = std::max(ties.lower(sx, sy), format.min_value) - shift;
      links.upper[j] = std::min(ties.upper(sx, sy), format.max_value) - shift;
    }
  }
  return links;
}

auto gather(const Grid<std::int32_t> &plane, const PlaneFormat &format, int bx, int by) -> Block {
  Block samples{};
  const double shift = format.level_shift();
  for (int y = 0; y < kBlock; ++y) {
    for (int x = 0; x < kBlock; ++x) {
      samples[static_cast<std::size_t>(y * kBlock + x)] =
          plane(std::min(bx + x, plane.width() - 1), std::min(by + y, plane.height() - 1)) - shift;
    }
  }
  return samples;
}

void scatter(Grid<std::int32_t> &plane, const PlaneFormat &format, int bx, int by,
             const Block &samples) {
  const double shift = format.level_shift();
  for (int y = 0; y < kBlock && by + y < plane.height(); ++y) {
    for (int x = 0; x < kBlock && bx + x < plane.width(); ++x) {
      plane(bx + x, by + y) =
          static_cast<std::int32_t>(samples[static_cast<std::size_t>(y * kBlock + x)] + shift);
    }
  }
}
} // namespace

auto BlockDctCoder::encode(const Grid<std::int32_t> &plane, const PlaneFormat &format) const
    -> std::vector<std::uint8_t> {
  BitWriter out;
  const int w = plane.width();
  const int h = plane.height();
  const double shift = format.level_shift();
  std::int64_t previousDc = 0;

  for (int by = 0; by < padded(h); by += kBlock) {
    for (int bx = 0; bx < padded(w); bx += kBlock) {
      Block samples{};
      for (int y = 0; y < kBlock; ++y) {
        for (int x = 0; x < kBlock; ++x) {
          // Edge replication into the padding.
          const int sx = std::min(bx + x, w - 1);
          const int sy = std::min(by + y, h - 1);
          samples[static_cast<std::size_t>(y * kBlock + x)] = plane(sx, sy) - shift;
        }
      }
      const Block coeffs = transform(samples, false);
      std::array<std::int64_t, kBlock * kBlock> levels{};
      for (std::size_t i = 0; i < levels.size(); ++i) {
        levels[i] = std::llround(coeffs[static_cast<std::size_t>(kZigzag[i])] / format.step);
      }
      out.put_se(levels[0] - previousDc);
      previousDc = levels[0];

      const auto nonzero = static_cast<std::uint64_t>(
          std::count_if(levels.begin() + 1, levels.end(), [](std::int64_t l) { return l != 0; }));
      out.put_ue(nonzero);
      std::uint64_t run = 0;
      for (std::size_t i = 1; i < levels.size(); ++i) {
        if (levels[i] == 0) {
          ++run;
          continue;
        }
        out.put_ue(run);
        out.put_se(levels[i]);
        run = 0;
      }
    }
  }
  return out.finish();
}

auto BlockDctCoder::decode(std::span<const std::uint8_t> bits, int width, int height,
                           const PlaneFormat &format, std::size_t baseOffset,
                           const SampleTies *ties) const -> Grid<std::int32_t> {
  if (ties != nullptr && (ties->source.width() != width || ties->source.height() != height)) {
    throw std::invalid_argument{"sample ties do not match the plane size"};
  }
  BitReader in{bits, baseOffset};
  Grid<std::int32_t> plane{width, height, 0};
  std::int64_t previousDc = 0;

  std::vector<Block> centres;
  for (int by = 0; by < padded(height); by += kBlock) {
    for (int bx = 0; bx < padded(width); bx += kBlock) {
      std::array<std::int64_t, kBlock * kBlock> levels{};
      levels[0] = previousDc + in.get_se();
      previousDc = levels[0];
      const std::uint64_t nonzero = in.get_ue();
      if (nonzero > kBlock * kBlock - 1) {
        in.fail("coefficient count exceeds block size");
      }
      std::size_t pos = 0;
      for (std::uint64_t n = 0; n < nonzero; ++n) {
        pos += in.get_ue() + 1;
        if (pos >= levels.size()) {
          in.fail("coefficient run past end of block");
        }
        levels[pos] = in.get_se();
      }
      Block coeffs{};
      for (std::size_t i = 0; i < levels.size(); ++i) {
        coeffs[static_cast<std::size_t>(kZigzag[i])] = static_cast<double>(levels[i]) * format.step;
      }
      const BlockLinks links =
          edge_links(format, std::min(kBlock, width - bx), std::min(kBlock, height - by));
      scatter(plane, format, bx, by,
              refine_block(coeffs, format, links, round_block(coeffs, format, links)));
      centres.push_back(coeffs);
    }
  }
  if (ties == nullptr) {
    return plane;
  }

  // Samples a re-encoder derives from others are tied to them, and blocks whose tied samples
  // left their quantizer cells are searched again. A copy of a sample in a later block only
  // settles once that block has, hence the rounds.
  for (int round = 0; round < kMaxTieRounds; ++round) {
    plane = apply_ties(plane, *ties);
    bool changed = false;
    std::size_t b = 0;
    for (int by = 0; by < padded(height); by += kBlock) {
      for (int bx = 0; bx < padded(width); bx += kBlock, ++b) {
        const BlockLinks links = tied_links(*ties, plane, format, bx, by);
        Block current = gather(plane, format, bx, by);
        Block values{};
        for (std::size_t k = 0; k < values.size(); ++k) {
          if (links.free(k)) {
            values[k] = std::clamp(current[k], links.lower[k], links.upper[k]);
          }
        }
        const Block start = expand(links, values);
        const Block refined = refine_block(centres[b], format, links, start);
        if (refined != current) {
          scatter(plane, format, bx, by, refined);
          changed = true;
        }
      }
    }
    if (!changed) {
      break;
    }
  }
  return apply_ties(plane, *ties);
}

auto default_component_coder() -> const ComponentCoder & {
  static const BlockDctCoder coder;
  return coder;
}

} // namespace ldinav
