#include <ldinav/bitstream.hpp>
#include <ldinav/dataset.hpp>
#include <ldinav/errors.hpp>
#include <ldinav/segment_container.hpp>
#include <ldinav/nol_coder.hpp>

#include <algorithm>
#include <array>
#include <cstring>
#include <numeric>

namespace ldinav {

namespace {
constexpr std::array<std::uint8_t, 4> kMagic{'X', 'L', 'D', 'I'};
constexpr int kMaxGenerations = 32;

void write_camera(ByteWriter &out, const CameraParams &cam) {
  out.f64(cam.fx);
  out.f64(cam.fy);
  out.f64(cam.cx);
  out.f64(cam.cy);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      out.f64(cam.R(i, j));
    }
  }
  for (int i = 0; i < 3; ++i) {
    out.f64(cam.t[i]);
  }
  out.f64(cam.z_near);
  out.f64(cam.z_far);
}

auto read_camera(ByteReader &in) -> CameraParams {
  CameraParams cam;
  cam.fx = in.f64();
  cam.fy = in.f64();
  cam.cx = in.f64();
  cam.cy = in.f64();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      cam.R(i, j) = in.f64();
    }
  }
  for (int i = 0; i < 3; ++i) {
    cam.t[i] = in.f64();
  }
  cam.z_near = in.f64();
  cam.z_far = in.f64();
  return cam;
}

struct PendingStream {
  int layer;
  ComponentKind kind;
  std::vector<std::uint8_t> bytes;
};

// Only rate-controlled segments choose q per stream, so only they carry a q prefix.
auto q_prefix_size(bool rateControlled) -> std::size_t { return rateControlled ? 8 : 0; }

auto component_stream(bool rateControlled, double q, const std::vector<std::uint8_t> &bits)
    -> std::vector<std::uint8_t> {
  ByteWriter w;
  if (rateControlled) {
    w.f64(q);
  }
  w.raw(bits);
  return w.take();
}

auto residual_of(const ComponentImage &filled, const ComponentImage &base) -> ComponentImage {
  ComponentImage out = filled;
  out.residual = true;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples.data()[i] -= base.samples.data()[i];
  }
  return out;
}

auto add_residual(const ComponentImage &residual, const ComponentImage &base) -> ComponentImage {
  ComponentImage out = residual;
  out.residual = false;
  const std::int32_t hi = max_sample(base.kind);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples.data()[i] = std::clamp(residual.samples.data()[i] + base.samples.data()[i], 0, hi);
  }
  return out;
}

auto kind_index(ComponentKind kind) -> std::size_t { return static_cast<std::size_t>(kind); }

// Ties matching how encode_once derives the coded plane of a layer from its masked samples.
auto coding_ties(Preprocess preprocess, const LayerMask &mask, ComponentKind kind,
                 const std::array<ComponentImage, 4> &base) -> SampleTies {
  if (preprocess == Preprocess::Aggregate) {
    return aggregate_ties(mask, kind);
  }
  if (mask.layer == 0) {
    return fill_ties(mask, kind);
  }
  return residual_ties(mask, base[kind_index(kind)]);
}
} // namespace

auto EncodedSegment::payload_size() const noexcept -> std::size_t {
  return std::accumulate(streams.begin(), streams.end(), std::size_t{0},
                         [](std::size_t acc, const StreamInfo &s) { return acc + s.length; });
}

auto EncodedSegment::stream_size(int layer, ComponentKind kind) const -> std::size_t {
  std::size_t total = 0;
  for (const auto &s : streams) {
    if (s.layer == layer && s.kind == kind) {
      total += s.length;
    }
  }
  return total;
}

namespace {
auto encode_once(const ExtendedLdi &ldi, const CoderQuality &quality, Preprocess preprocess)
    -> EncodedSegment {
  const int w = ldi.ext_width;
  const int h = ldi.ext_height;

  std::vector<PendingStream> pending;
  pending.push_back({0, ComponentKind::Nol, encode_nol(ldi.nol)});

  std::array<ComponentImage, 4> base{};
  for (int l = 0; l < ldi.layer_count(); ++l) {
    const LayerMask mask = layer_mask(ldi.nol, l);
    for (const auto kind : kLayerComponents) {
      const ComponentImage comp = extract_component(ldi, l, kind);
      ComponentImage input;
      if (preprocess == Preprocess::Aggregate) {
        input = aggregate_rows(comp, mask).image;
      } else if (l == 0) {
        input = fill_uncovered(comp, mask);
      } else {
        input = residual_of(layer_fill(comp, base[kind_index(kind)], mask), base[kind_index(kind)]);
      }

      double q = quality.q_color;
      if (quality.bpp_color_target) {
        const double target =
            kind == ComponentKind::D ? *quality.depth_bpp_target() : *quality.bpp_color_target;
        q = rate_control(input, target).quality.q_color;
      }
      const CoderQuality streamQuality{q, std::nullopt};
      auto bits = encode_component(input, streamQuality);
      if (preprocess == Preprocess::Fill && l == 0) {
        const SampleTies ties = coding_ties(preprocess, mask, kind, base);
        base[kind_index(kind)] =
            decode_component(bits, kind, 0, w, h, streamQuality, false, 0, &ties);
      }
      pending.push_back({l, kind, component_stream(quality.bpp_color_target.has_value(), q, bits)});
    }
  }

  EncodedSegment segment;
  auto &hdr = segment.header;
  hdr.ref_cam = ldi.ref_cam;
  hdr.ext_width = w;
  hdr.ext_height = h;
  hdr.origin_dx = ldi.origin_dx;
  hdr.origin_dy = ldi.origin_dy;
  hdr.layers = ldi.layer_count();
  hdr.z_near = ldi.ref_cam.z_near;
  hdr.z_far = ldi.ref_cam.z_far;
  hdr.q_color = quality.q_color;
  hdr.bpp_color_target = quality.bpp_color_target.value_or(0.0);
  hdr.preprocess = preprocess;

  ByteWriter out;
  out.raw(kMagic);
  out.u8(kContainerVersion);
  write_camera(out, hdr.ref_cam);
  out.u32(static_cast<std::uint32_t>(hdr.ext_width));
  out.u32(static_cast<std::uint32_t>(hdr.ext_height));
  out.i32(hdr.origin_dx);
  out.i32(hdr.origin_dy);
  out.u8(static_cast<std::uint8_t>(hdr.layers));
  out.f64(hdr.q_color);
  out.f64(hdr.bpp_color_target);
  out.u8(static_cast<std::uint8_t>(hdr.preprocess));
  out.u32(static_cast<std::uint32_t>(pending.size()));
  for (const auto &s : pending) {
    out.u8(static_cast<std::uint8_t>(s.layer));
    out.u8(static_cast<std::uint8_t>(s.kind));
    out.u32(static_cast<std::uint32_t>(s.bytes.size()));
  }
  const std::size_t payloadStart = out.bytes().size();
  for (const auto &s : pending) {
    out.raw(s.bytes);
  }
  const auto payload = std::span{out.bytes()}.subspan(payloadStart);
  out.u32(crc32(payload));

  return parse_segment(out.take());
}
} // namespace

auto encode_segment(const ExtendedLdi &ldi, const CoderQuality &quality, Preprocess preprocess)
    -> EncodedSegment {
  // Lossy depth can tie or swap neighbouring layers of a decoded LDI, so only structure is
  // required here.
  if (auto problem = check_ldi_invariants(ldi, std::nullopt)) {
    throw std::invalid_argument{"cannot encode invalid LDI: " + *problem};
  }
  // Re-coding a reconstruction can move a few coefficients across quantizer thresholds. Coding
  // the reconstruction again until the stream stops changing makes the result a fixed point,
  // so decoding and re-encoding at the same quality reproduces it byte for byte.
  EncodedSegment current = encode_once(ldi, quality, preprocess);
  for (int generation = 0; generation < kMaxGenerations; ++generation) {
    EncodedSegment next = encode_once(decode_segment(current), quality, preprocess);
    if (next.bytes == current.bytes) {
      break;
    }
    current = std::move(next);
  }
  return current;
}

auto parse_segment(std::vector<std::uint8_t> bytes) -> EncodedSegment {
  ByteReader in{bytes};
  const auto magic = in.raw(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
    throw DecodeError{"bad container magic", 0};
  }
  if (const auto version = in.u8(); version != kContainerVersion) {
    throw DecodeError{"unsupported container version " + std::to_string(version), 4};
  }
  EncodedSegment segment;
  auto &hdr = segment.header;
  hdr.ref_cam = read_camera(in);
  hdr.ext_width = static_cast<int>(in.u32());
  hdr.ext_height = static_cast<int>(in.u32());
  hdr.ref_cam.width = hdr.ext_width;
  hdr.ref_cam.height = hdr.ext_height;
  hdr.origin_dx = in.i32();
  hdr.origin_dy = in.i32();
  hdr.layers = in.u8();
  hdr.z_near = hdr.ref_cam.z_near;
  hdr.z_far = hdr.ref_cam.z_far;
  hdr.q_color = in.f64();
  hdr.bpp_color_target = in.f64();
  const auto preprocessOffset = in.offset();
  const auto preprocess = in.u8();
  if (preprocess > 1) {
    throw DecodeError{"unknown preprocessing mode", preprocessOffset};
  }
  hdr.preprocess = static_cast<Preprocess>(preprocess);
  if (hdr.ext_width <= 0 || hdr.ext_height <= 0 || hdr.ext_width > (1 << 15) ||
      hdr.ext_height > (1 << 15) || hdr.layers < 1 || !(hdr.q_color > 0.0) ||
      !(hdr.bpp_color_target >= 0.0) || hdr.origin_dx < 0 ||
      hdr.origin_dy < 0 || !(hdr.z_near > 0.0) || !(hdr.z_far > hdr.z_near)) {
    throw DecodeError{"inconsistent segment header", preprocessOffset};
  }

  const auto countOffset = in.offset();
  const std::uint32_t count = in.u32();
  if (count != 1 + 4 * static_cast<std::uint32_t>(hdr.layers)) {
    throw DecodeError{"unexpected stream count", countOffset};
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto entryOffset = in.offset();
    StreamInfo info;
    info.layer = in.u8();
    const auto kind = in.u8();
    info.length = in.u32();
    const bool expectedNol = i == 0;
    const auto expectedKind = expectedNol ? ComponentKind::Nol : kLayerComponents[(i - 1) % 4];
    const int expectedLayer = expectedNol ? 0 : static_cast<int>((i - 1) / 4);
    if (kind != static_cast<std::uint8_t>(expectedKind) || info.layer != expectedLayer) {
      throw DecodeError{"stream table out of order", entryOffset};
    }
    info.kind = expectedKind;
    segment.streams.push_back(info);
  }
  std::size_t offset = in.offset();
  for (auto &info : segment.streams) {
    info.offset = offset;
    offset += info.length;
  }
  if (offset + 4 != bytes.size()) {
    throw DecodeError{"stream lengths do not match container size", in.offset()};
  }
  const auto payload = std::span{bytes}.subspan(in.offset(), offset - in.offset());
  ByteReader crcReader{std::span{bytes}.subspan(offset)};
  if (crcReader.u32() != crc32(payload)) {
    throw DecodeError{"payload CRC mismatch", offset};
  }
  for (auto &info : segment.streams) {
    if (info.kind == ComponentKind::Nol) {
      continue;
    }
    if (hdr.bpp_color_target == 0.0) {
      info.q = hdr.q_color;
      continue;
    }
    if (info.length < 8) {
      throw DecodeError{"component stream too short", info.offset};
    }
    ByteReader qReader{std::span{bytes}.subspan(info.offset, 8)};
    info.q = qReader.f64();
    if (!(info.q > 0.0)) {
      throw DecodeError{"invalid stream quantizer", info.offset};
    }
  }
  segment.bytes = std::move(bytes);
  return segment;
}

auto decode_segment(const EncodedSegment &segment) -> ExtendedLdi {
  const auto &hdr = segment.header;
  const int w = hdr.ext_width;
  const int h = hdr.ext_height;

  ExtendedLdi ldi;
  ldi.ref_cam = hdr.ref_cam;
  ldi.origin_dx = hdr.origin_dx;
  ldi.origin_dy = hdr.origin_dy;
  ldi.ext_width = w;
  ldi.ext_height = h;

  const auto &nolInfo = segment.streams.front();
  ldi.nol = decode_nol(segment.stream(nolInfo), w, h, nolInfo.offset);
  if (*std::max_element(ldi.nol.begin(), ldi.nol.end()) > hdr.layers) {
    throw DecodeError{"layer count exceeds header", nolInfo.offset};
  }
  ldi.layers.assign(static_cast<std::size_t>(hdr.layers), Grid<LdiPixel>{w, h});

  std::array<ComponentImage, 4> base{};
  for (std::size_t s = 1; s < segment.streams.size(); ++s) {
    const auto &info = segment.streams[s];
    const int l = info.layer;
    const LayerMask mask = layer_mask(ldi.nol, l);
    const bool residual = hdr.preprocess == Preprocess::Fill && l > 0;
    const std::size_t prefix = q_prefix_size(hdr.bpp_color_target > 0.0);
    const auto bits = segment.stream(info).subspan(prefix);
    const SampleTies ties = coding_ties(hdr.preprocess, mask, info.kind, base);
    ComponentImage decoded = decode_component(bits, info.kind, l, w, h,
                                              CoderQuality{info.q, std::nullopt}, residual,
                                              info.offset + prefix, &ties);
    if (hdr.preprocess == Preprocess::Aggregate) {
      decoded = deaggregate_rows(decoded, mask);
    } else if (l == 0) {
      base[kind_index(info.kind)] = decoded;
    } else {
      decoded = add_residual(decoded, base[kind_index(info.kind)]);
    }
    const ComponentImage kept = strip_masked(decoded, mask);

    auto &grid = ldi.layers[static_cast<std::size_t>(l)];
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (mask.bits(x, y) == 0) {
          continue;
        }
        auto &p = grid(x, y);
        p.source_view = kUnknownSourceView;
        const std::int32_t v = kept.samples(x, y);
        switch (info.kind) {
        case ComponentKind::Y:
          p.y = static_cast<std::uint8_t>(v);
          break;
        case ComponentKind::Cb:
          p.cb = static_cast<std::uint8_t>(v);
          break;
        case ComponentKind::Cr:
          p.cr = static_cast<std::uint8_t>(v);
          break;
        case ComponentKind::D:
          p.depth = dequantize_inverse_depth(static_cast<std::uint16_t>(std::clamp(v, 0, 65535)),
                                             hdr.z_near, hdr.z_far);
          break;
        case ComponentKind::Nol:
          break;
        }
      }
    }
  }
  return ldi;
}

} // namespace ldinav
