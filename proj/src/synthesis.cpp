#include <ldinav/synthesis.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <thread>
#include <vector>

namespace ldinav {

auto RenderedView::hole_count() const -> std::size_t {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{0}));
}

namespace {

struct WarpedSample {
  double z;
  std::uint8_t y, cb, cr, layer;
};

struct Candidate {
  std::uint32_t pixel;
  std::uint32_t sample;
};

// Collects warped samples and their footprints, then resolves each target pixel.
class Rasterizer {
public:
  Rasterizer(const CameraParams &target, const RenderOptions &options)
      : m_target{target}, m_options{options} {
    validate_camera(target);
  }

  void add(const Warper &warp, double u, double v, double z, std::uint8_t y, std::uint8_t cb,
           std::uint8_t cr, std::uint8_t layer) {
    const auto p = warp(u, v, z);
    if (!p) {
      return;
    }
    bool wide = false;
    if (m_options.adaptive_splat) {
      const auto px = warp(u + 1.0, v, z);
      const auto py = warp(u, v + 1.0, z);
      if (px && py) {
        const double sx = std::hypot(px->u - p->u, px->v - p->v);
        const double sy = std::hypot(py->u - p->u, py->v - p->v);
        wide = std::max(sx, sy) > m_options.splat_stretch;
      }
    }
    const auto index = static_cast<std::uint32_t>(m_samples.size());
    bool used = false;
    auto cover = [&](int x, int yy) {
      if (x < 0 || yy < 0 || x >= m_target.width || yy >= m_target.height) {
        return;
      }
      m_candidates.push_back(
          {static_cast<std::uint32_t>(yy) * static_cast<std::uint32_t>(m_target.width) +
               static_cast<std::uint32_t>(x),
           index});
      used = true;
    };
    if (wide) {
      const int x0 = static_cast<int>(std::floor(p->u));
      const int y0 = static_cast<int>(std::floor(p->v));
      cover(x0, y0);
      cover(x0 + 1, y0);
      cover(x0, y0 + 1);
      cover(x0 + 1, y0 + 1);
    } else {
      cover(to_cell(p->u), to_cell(p->v));
    }
    if (used) {
      m_samples.push_back({p->depth, y, cb, cr, layer});
    }
  }

  auto resolve() -> RenderedView {
    const int w = m_target.width;
    const int h = m_target.height;
    RenderedView out{w, h};
    unsigned threads = m_options.threads != 0 ? m_options.threads
                                              : std::max(1U, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(h));
    const int bandRows = (h + static_cast<int>(threads) - 1) / static_cast<int>(threads);
    const auto bandOf = [&](std::uint32_t pixel) {
      return static_cast<std::size_t>(pixel / static_cast<std::uint32_t>(w)) /
             static_cast<std::size_t>(bandRows);
    };

    std::vector<std::vector<Candidate>> bins(threads);
    for (const auto &c : m_candidates) {
      bins[bandOf(c.pixel)].push_back(c);
    }

    auto work = [&](std::size_t band) {
      const auto &bin = bins[band];
      std::vector<double> nearest(static_cast<std::size_t>(bandRows) * static_cast<std::size_t>(w),
                                  std::numeric_limits<double>::infinity());
      std::vector<std::uint32_t> winner(nearest.size(), std::numeric_limits<std::uint32_t>::max());
      const std::uint32_t first =
          static_cast<std::uint32_t>(band) * static_cast<std::uint32_t>(bandRows) *
          static_cast<std::uint32_t>(w);
      for (const auto &c : bin) {
        auto &z = nearest[c.pixel - first];
        z = std::min(z, m_samples[c.sample].z);
      }
      for (const auto &c : bin) {
        const auto local = c.pixel - first;
        const auto &s = m_samples[c.sample];
        if (s.z > nearest[local] * (1.0 + m_options.depth_tolerance)) {
          continue;
        }
        auto &best = winner[local];
        if (best == std::numeric_limits<std::uint32_t>::max()) {
          best = c.sample;
          continue;
        }
        const auto &b = m_samples[best];
        if (std::tie(s.layer, s.z, c.sample) < std::tie(b.layer, b.z, best)) {
          best = c.sample;
        }
      }
      for (std::size_t local = 0; local < winner.size(); ++local) {
        if (winner[local] == std::numeric_limits<std::uint32_t>::max()) {
          continue;
        }
        const auto pixel = first + static_cast<std::uint32_t>(local);
        const int x = static_cast<int>(pixel % static_cast<std::uint32_t>(w));
        const int y = static_cast<int>(pixel / static_cast<std::uint32_t>(w));
        const auto &s = m_samples[winner[local]];
        out.image.y(x, y) = s.y;
        out.image.cb(x, y) = s.cb;
        out.image.cr(x, y) = s.cr;
        out.depth(x, y) = s.z;
        out.valid(x, y) = 1;
        out.source_layer(x, y) = s.layer;
      }
    };

    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t band = 0; band < threads; ++band) {
        pool.emplace_back(work, band);
      }
    }
    return out;
  }

private:
  CameraParams m_target;
  RenderOptions m_options;
  std::vector<WarpedSample> m_samples;
  std::vector<Candidate> m_candidates;
};

} // namespace

auto render_view(const ExtendedLdi &ldi, const CameraParams &target, const RenderOptions &options)
    -> RenderedView {
  Rasterizer raster{target, options};
  const Warper warp{ldi.ref_cam, target};
  const int layers = std::min(ldi.layer_count(), options.max_layers);
  for (int l = 0; l < layers; ++l) {
    const auto &grid = ldi.layers[static_cast<std::size_t>(l)];
    for (int y = 0; y < ldi.ext_height; ++y) {
      for (int x = 0; x < ldi.ext_width; ++x) {
        if (!ldi.has(l, x, y)) {
          continue;
        }
        const auto &p = grid(x, y);
        raster.add(warp, x, y, p.depth, p.y, p.cb, p.cr, static_cast<std::uint8_t>(l));
      }
    }
  }
  return raster.resolve();
}

auto warp_view(const ViewData &view, const CameraParams &target, const RenderOptions &options)
    -> RenderedView {
  Rasterizer raster{target, options};
  const Warper warp{view.camera, target};
  for (int y = 0; y < view.depth.height(); ++y) {
    for (int x = 0; x < view.depth.width(); ++x) {
      if (view.depth.valid(x, y) == 0) {
        continue;
      }
      raster.add(warp, x, y, view.depth.depth(x, y), view.image.y(x, y), view.image.cb(x, y),
                 view.image.cr(x, y), 0);
    }
  }
  return raster.resolve();
}

auto hole_fill(const RenderedView &view) -> RenderedView {
  RenderedView out = view;
  const int w = view.width();
  const int h = view.height();
  auto copy = [&](int dx, int dy, int sx, int sy) {
    out.image.y(dx, dy) = out.image.y(sx, sy);
    out.image.cb(dx, dy) = out.image.cb(sx, sy);
    out.image.cr(dx, dy) = out.image.cr(sx, sy);
    out.depth(dx, dy) = out.depth(sx, sy);
    out.inpainted(dx, dy) = 1;
  };

  std::vector<int> left(static_cast<std::size_t>(w));
  std::vector<int> right(static_cast<std::size_t>(w));
  std::vector<std::uint8_t> rowFilled(static_cast<std::size_t>(h), 0);
  for (int y = 0; y < h; ++y) {
    int last = -1;
    for (int x = 0; x < w; ++x) {
      if (view.valid(x, y) != 0) {
        last = x;
      }
      left[static_cast<std::size_t>(x)] = last;
    }
    if (last < 0) {
      continue;
    }
    rowFilled[static_cast<std::size_t>(y)] = 1;
    last = -1;
    for (int x = w - 1; x >= 0; --x) {
      if (view.valid(x, y) != 0) {
        last = x;
      }
      right[static_cast<std::size_t>(x)] = last;
    }
    for (int x = 0; x < w; ++x) {
      if (view.valid(x, y) != 0) {
        continue;
      }
      const int l = left[static_cast<std::size_t>(x)];
      const int r = right[static_cast<std::size_t>(x)];
      int src = l;
      if (l < 0 || (r >= 0 && view.depth(r, y) > view.depth(l, y))) {
        src = r;
      }
      copy(x, y, src, y);
    }
  }

  std::vector<int> above(static_cast<std::size_t>(h));
  int last = -1;
  for (int y = 0; y < h; ++y) {
    if (rowFilled[static_cast<std::size_t>(y)] != 0) {
      last = y;
    }
    above[static_cast<std::size_t>(y)] = last;
  }
  last = -1;
  for (int y = h - 1; y >= 0; --y) {
    if (rowFilled[static_cast<std::size_t>(y)] != 0) {
      last = y;
      continue;
    }
    const int a = above[static_cast<std::size_t>(y)];
    const int b = last;
    for (int x = 0; x < w; ++x) {
      if (a < 0 && b < 0) {
        out.image.y(x, y) = 0;
        out.image.cb(x, y) = 128;
        out.image.cr(x, y) = 128;
        out.inpainted(x, y) = 1;
        continue;
      }
      int src = a;
      if (a < 0 || (b >= 0 && out.depth(x, b) > out.depth(x, a))) {
        src = b;
      }
      copy(x, y, x, src);
    }
  }
  std::fill(out.valid.begin(), out.valid.end(), std::uint8_t{1});
  return out;
}

auto ground_truth_virtual_view(const MultiviewDataset &dataset, std::size_t left,
                               std::size_t right, double alpha, const RenderOptions &options)
    -> ViewImage {
  if (left >= dataset.size() || right >= dataset.size()) {
    throw std::invalid_argument{"view index out of range"};
  }
  // As in interpolate_cameras, both argument orders must reach the same weight bit for bit.
  if (alpha > 0.5) {
    std::swap(left, right);
    alpha = 1.0 - alpha;
  } else {
    alpha = 1.0 - (1.0 - alpha);
  }
  const auto &a = dataset.views[left];
  const auto &b = dataset.views[right];
  const CameraParams cam = interpolate_cameras(a.camera, b.camera, alpha);
  const RenderedView ra = warp_view(a, cam, options);
  const RenderedView rb = warp_view(b, cam, options);

  RenderedView merged{cam.width, cam.height};
  const auto blend = [alpha](std::uint8_t p, std::uint8_t q) {
    return static_cast<std::uint8_t>(std::lround((1.0 - alpha) * p + alpha * q));
  };
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const bool va = ra.valid(x, y) != 0;
      const bool vb = rb.valid(x, y) != 0;
      if (!va && !vb) {
        continue;
      }
      merged.valid(x, y) = 1;
      const double za = ra.depth(x, y);
      const double zb = rb.depth(x, y);
      const bool agree = va && vb && std::abs(za - zb) <= options.depth_tolerance * std::min(za, zb);
      if (agree) {
        merged.image.y(x, y) = blend(ra.image.y(x, y), rb.image.y(x, y));
        merged.image.cb(x, y) = blend(ra.image.cb(x, y), rb.image.cb(x, y));
        merged.image.cr(x, y) = blend(ra.image.cr(x, y), rb.image.cr(x, y));
        merged.depth(x, y) = (1.0 - alpha) * za + alpha * zb;
        continue;
      }
      const auto &src = (va && (!vb || za < zb)) ? ra : rb;
      merged.image.y(x, y) = src.image.y(x, y);
      merged.image.cb(x, y) = src.image.cb(x, y);
      merged.image.cr(x, y) = src.image.cr(x, y);
      merged.depth(x, y) = src.depth(x, y);
    }
  }
  return hole_fill(merged).image;
}

} // namespace ldinav
