#include <ldinav/dataset.hpp>
#include <ldinav/ldi_codec.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ldinav {

auto max_sample(ComponentKind kind) -> std::int32_t {
  return kind == ComponentKind::D ? 65535 : 255;
}

auto quantizer_step(ComponentKind kind, double q) -> double {
  return kind == ComponentKind::D ? (q / 2.0) * 256.0 : q;
}

auto plane_format(ComponentKind kind, bool residual, double q) -> PlaneFormat {
  const std::int32_t hi = max_sample(kind);
  return PlaneFormat{residual ? -hi : 0, hi, quantizer_step(kind, q)};
}

auto layer_mask(const Grid<std::uint8_t> &nol, int layer) -> LayerMask {
  if (layer < 0) {
    throw std::invalid_argument{"layer index must be non-negative"};
  }
  LayerMask mask{layer, Grid<std::uint8_t>{nol.width(), nol.height(), 0}};
  for (std::size_t i = 0; i < nol.size(); ++i) {
    mask.bits.data()[i] = nol.data()[i] > layer ? 1 : 0;
  }
  return mask;
}

auto extract_component(const ExtendedLdi &ldi, int layer, ComponentKind kind) -> ComponentImage {
  ComponentImage out{kind, layer, false, Grid<std::int32_t>{ldi.ext_width, ldi.ext_height, 0}};
  const auto &grid = ldi.layers.at(static_cast<std::size_t>(layer));
  for (int y = 0; y < ldi.ext_height; ++y) {
    for (int x = 0; x < ldi.ext_width; ++x) {
      if (!ldi.has(layer, x, y)) {
        continue;
      }
      const auto &p = grid(x, y);
      switch (kind) {
      case ComponentKind::Y:
        out.samples(x, y) = p.y;
        break;
      case ComponentKind::Cb:
        out.samples(x, y) = p.cb;
        break;
      case ComponentKind::Cr:
        out.samples(x, y) = p.cr;
        break;
      case ComponentKind::D:
        out.samples(x, y) = quantize_inverse_depth(p.depth, ldi.ref_cam.z_near, ldi.ref_cam.z_far);
        break;
      case ComponentKind::Nol:
        throw std::invalid_argument{"NOL is not a layer component"};
      }
    }
  }
  return out;
}

namespace {
void require_same_size(const Grid<std::int32_t> &a, const Grid<std::uint8_t> &b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw std::invalid_argument{"component and mask dimensions differ"};
  }
}

auto mid_value(const ComponentImage &comp) -> std::int32_t {
  return comp.residual ? 0 : (max_sample(comp.kind) + 1) / 2;
}
} // namespace

auto layer_fill(const ComponentImage &comp, const ComponentImage &base, const LayerMask &mask)
    -> ComponentImage {
  require_same_size(comp.samples, mask.bits);
  require_same_size(base.samples, mask.bits);
  ComponentImage out = comp;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    if (mask.bits.data()[i] == 0) {
      out.samples.data()[i] = base.samples.data()[i];
    }
  }
  return out;
}

auto fill_uncovered(const ComponentImage &comp, const LayerMask &mask) -> ComponentImage {
  require_same_size(comp.samples, mask.bits);
  ComponentImage out = comp;
  const int w = comp.samples.width();
  const int h = comp.samples.height();
  Grid<std::uint8_t> filled = mask.bits;

  const auto scan = [&](int x, int y, std::optional<std::int32_t> &last) {
    if (mask.bits(x, y) != 0) {
      last = out.samples(x, y);
    } else if (last && filled(x, y) == 0) {
      out.samples(x, y) = *last;
      filled(x, y) = 1;
    }
  };
  std::vector<bool> rowHasSample(static_cast<std::size_t>(h), false);
  for (int y = 0; y < h; ++y) {
    std::optional<std::int32_t> last;
    for (int x = 0; x < w; ++x) {
      scan(x, y, last);
    }
    rowHasSample[static_cast<std::size_t>(y)] = last.has_value();
    last.reset();
    for (int x = w - 1; x >= 0; --x) {
      scan(x, y, last);
    }
  }

  if (std::find(rowHasSample.begin(), rowHasSample.end(), true) == rowHasSample.end()) {
    std::fill(out.samples.begin(), out.samples.end(), mid_value(comp));
    return out;
  }
  // Rows without any sample copy the nearest complete row, above first.
  const auto copyRows = [&](int y, std::optional<int> &lastRow) {
    if (rowHasSample[static_cast<std::size_t>(y)]) {
      lastRow = y;
    } else if (lastRow && filled(0, y) == 0) {
      for (int x = 0; x < w; ++x) {
        out.samples(x, y) = out.samples(x, *lastRow);
        filled(x, y) = 1;
      }
    }
  };
  std::optional<int> lastRow;
  for (int y = 0; y < h; ++y) {
    copyRows(y, lastRow);
  }
  lastRow.reset();
  for (int y = h - 1; y >= 0; --y) {
    copyRows(y, lastRow);
  }
  return out;
}

auto strip_masked(const ComponentImage &comp, const LayerMask &mask) -> ComponentImage {
  require_same_size(comp.samples, mask.bits);
  ComponentImage out = comp;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    if (mask.bits.data()[i] == 0) {
      out.samples.data()[i] = 0;
    }
  }
  return out;
}

auto aggregate_rows(const ComponentImage &comp, const LayerMask &mask) -> AggregatedRows {
  require_same_size(comp.samples, mask.bits);
  AggregatedRows out{comp, {}};
  const int w = comp.samples.width();
  for (int y = 0; y < comp.samples.height(); ++y) {
    int n = 0;
    for (int x = 0; x < w; ++x) {
      if (mask.bits(x, y) != 0) {
        out.image.samples(n++, y) = comp.samples(x, y);
      }
    }
    const std::int32_t pad = n > 0 ? out.image.samples(n - 1, y) : mid_value(comp);
    for (int x = n; x < w; ++x) {
      out.image.samples(x, y) = pad;
    }
    out.counts.push_back(n);
  }
  return out;
}

auto deaggregate_rows(const ComponentImage &aggregated, const LayerMask &mask) -> ComponentImage {
  require_same_size(aggregated.samples, mask.bits);
  ComponentImage out = aggregated;
  std::fill(out.samples.begin(), out.samples.end(), 0);
  for (int y = 0; y < mask.bits.height(); ++y) {
    int n = 0;
    for (int x = 0; x < mask.bits.width(); ++x) {
      if (mask.bits(x, y) != 0) {
        out.samples(x, y) = aggregated.samples(n++, y);
      }
    }
  }
  return out;
}

namespace {
auto free_ties(int width, int height, std::int32_t lower, std::int32_t upper) -> SampleTies {
  SampleTies ties{Grid<std::int32_t>{width, height, 0}, Grid<std::int32_t>{width, height, 0},
                  Grid<std::int32_t>{width, height, lower}, Grid<std::int32_t>{width, height, upper}};
  for (std::size_t i = 0; i < ties.source.size(); ++i) {
    ties.source.data()[i] = static_cast<std::int32_t>(i);
  }
  return ties;
}

void tie_fixed(SampleTies &ties, int x, int y, std::int32_t value) {
  ties.source(x, y) = -1;
  ties.fixed(x, y) = value;
}
} // namespace

auto fill_ties(const LayerMask &mask, ComponentKind kind) -> SampleTies {
  const int w = mask.bits.width();
  const int h = mask.bits.height();
  SampleTies ties = free_ties(w, h, 0, max_sample(kind));
  const std::int32_t mid = (max_sample(kind) + 1) / 2;
  if (std::find(mask.bits.begin(), mask.bits.end(), 1) == mask.bits.end()) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        tie_fixed(ties, x, y, mid);
      }
    }
    return ties;
  }
  // Filling a plane of sample indices yields the index each filled cell copies.
  ties.source = fill_uncovered(ComponentImage{kind, 0, false, ties.source}, mask).samples;
  return ties;
}

auto aggregate_ties(const LayerMask &mask, ComponentKind kind) -> SampleTies {
  const int w = mask.bits.width();
  SampleTies ties = free_ties(w, mask.bits.height(), 0, max_sample(kind));
  const std::int32_t mid = (max_sample(kind) + 1) / 2;
  for (int y = 0; y < mask.bits.height(); ++y) {
    const auto n = static_cast<int>(std::count(&mask.bits(0, y), &mask.bits(0, y) + w, 1));
    for (int x = n; x < w; ++x) {
      if (n > 0) {
        ties.source(x, y) = y * w + n - 1;
      } else {
        tie_fixed(ties, x, y, mid);
      }
    }
  }
  return ties;
}

auto residual_ties(const LayerMask &mask, const ComponentImage &base) -> SampleTies {
  require_same_size(base.samples, mask.bits);
  const std::int32_t hi = max_sample(base.kind);
  SampleTies ties = free_ties(mask.bits.width(), mask.bits.height(), -hi, hi);
  for (int y = 0; y < mask.bits.height(); ++y) {
    for (int x = 0; x < mask.bits.width(); ++x) {
      if (mask.bits(x, y) == 0) {
        tie_fixed(ties, x, y, 0);
      } else {
        ties.lower(x, y) = -base.samples(x, y);
        ties.upper(x, y) = hi - base.samples(x, y);
      }
    }
  }
  return ties;
}

auto encode_component(const ComponentImage &comp, const CoderQuality &quality)
    -> std::vector<std::uint8_t> {
  if (!(quality.q_color > 0.0)) {
    throw std::invalid_argument{"quality must be positive"};
  }
  return default_component_coder().encode(comp.samples,
                                          plane_format(comp.kind, comp.residual, quality.q_color));
}

auto decode_component(std::span<const std::uint8_t> bits, ComponentKind kind, int layer, int width,
                      int height, const CoderQuality &quality, bool residual,
                      std::size_t baseOffset, const SampleTies *ties) -> ComponentImage {
  return ComponentImage{kind, layer, residual,
                        default_component_coder().decode(
                            bits, width, height, plane_format(kind, residual, quality.q_color),
                            baseOffset, ties)};
}

auto rate_control(const ComponentImage &comp, double bppTarget) -> RateControlResult {
  if (!(bppTarget > 0.0)) {
    throw std::invalid_argument{"bpp target must be positive"};
  }
  const double pixels = static_cast<double>(comp.samples.size());
  const auto bpp = [&](double q) {
    return static_cast<double>(encode_component(comp, CoderQuality{q, std::nullopt}).size()) *
           8.0 / pixels;
  };
  const double limit = bppTarget * 1.05;

  const double finest = bpp(kFinestQuality);
  if (finest <= limit) {
    const auto status = finest < bppTarget * 0.95 ? RateStatus::UnderBudget : RateStatus::Reached;
    return {CoderQuality{kFinestQuality, std::nullopt}, finest, status};
  }
  const double coarsest = bpp(kCoarsestQuality);
  if (coarsest > limit) {
    return {CoderQuality{kCoarsestQuality, std::nullopt}, coarsest, RateStatus::OverBudget};
  }
  double tooFine = std::log(kFinestQuality);
  double fits = std::log(kCoarsestQuality);
  double fitsBpp = coarsest;
  for (int probe = 2; probe < 20; ++probe) {
    const double mid = 0.5 * (tooFine + fits);
    const double achieved = bpp(std::exp(mid));
    if (achieved <= limit) {
      fits = mid;
      fitsBpp = achieved;
    } else {
      tooFine = mid;
    }
  }
  const auto status = fitsBpp < bppTarget * 0.95 ? RateStatus::UnderBudget : RateStatus::Reached;
  return {CoderQuality{std::exp(fits), std::nullopt}, fitsBpp, status};
}

} // namespace ldinav
