#pragma once

#include <ldinav/dataset.hpp>
#include <ldinav/ldi_build.hpp>
#include <ldinav/navigation.hpp>
#include <ldinav/segment_container.hpp>
#include <ldinav/synthesis.hpp>

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace ldinav {

struct SegmentSettings {
  BuildOptions build;
  CoderQuality quality;
  Preprocess preprocess{Preprocess::Fill};
  RenderOptions render;
};

// Lazily builds, encodes and decodes navigation segments. Each segment is produced at most
// once even under concurrent requests; the results are immutable afterwards.
class SegmentCache {
public:
  SegmentCache(MultiviewDataset dataset, NavigationDomain domain, SegmentSettings settings);
  ~SegmentCache();

  SegmentCache(const SegmentCache &) = delete;
  auto operator=(const SegmentCache &) -> SegmentCache & = delete;

  [[nodiscard]] auto domain() const noexcept -> const NavigationDomain & { return m_domain; }
  [[nodiscard]] auto settings() const noexcept -> const SegmentSettings & { return m_settings; }

  /// Throws std::out_of_range for an unknown id.
  auto encoded(int id) -> const EncodedSegment &;
  auto decoded(int id) -> const ExtendedLdi &;

  /// Number of times segment `id` has been encoded (0 or 1).
  [[nodiscard]] auto encode_count(int id) const -> std::size_t;
  /// Number of accesses to segment `id` through encoded() or decoded().
  [[nodiscard]] auto access_count(int id) const -> std::size_t;

private:
  struct Entry;
  auto entry(int id) -> Entry &;
  [[nodiscard]] auto entry(int id) const -> const Entry &;

  MultiviewDataset m_dataset;
  NavigationDomain m_domain;
  SegmentSettings m_settings;
  std::vector<std::unique_ptr<Entry>> m_entries;
};

struct PoseRender {
  int segment{0};
  RenderedView view; // hole-filled
};

/// Renders a pose from the segment selected for it.
auto render_pose(SegmentCache &cache, double pose) -> PoseRender;
auto render_pose_png(SegmentCache &cache, double pose) -> std::vector<std::uint8_t>;

struct SessionStats {
  std::uint64_t segment_fetches{0};
  std::uint64_t bytes_transferred{0};
  std::uint64_t render_requests{0};

  friend auto operator==(const SessionStats &, const SessionStats &) -> bool = default;
};

// HTTP front end:
//   GET /segments                     JSON list of {id, pose_range, byte_size}
//   GET /segment/<id>                 XLDI container bytes
//   GET /render?pose=<s>&session=<t>  PNG frame, X-Segment-Id header
//   GET /stats?session=<t>            JSON session counters
// A session is charged one fetch of a segment's container the first time it renders a pose in
// that segment.
class NavigationService {
public:
  explicit NavigationService(SegmentCache &cache);
  ~NavigationService();

  NavigationService(const NavigationService &) = delete;
  auto operator=(const NavigationService &) -> NavigationService & = delete;

  /// Binds (port 0 picks a free port), starts serving on a background thread and returns the
  /// bound port. Throws std::runtime_error if the port cannot be bound.
  auto start(const std::string &host, int port) -> int;
  /// Binds and serves on the calling thread until stop() is called.
  void run(const std::string &host, int port);
  void stop();

  [[nodiscard]] auto stats(const std::string &session) const -> SessionStats;

private:
  struct Impl;
  std::unique_ptr<Impl> m_impl;
};

} // namespace ldinav
