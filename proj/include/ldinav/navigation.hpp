#pragma once

#include <ldinav/dataset.hpp>
#include <ldinav/geometry.hpp>

#include <cstddef>
#include <optional>
#include <vector>

namespace ldinav {

// Poses are fractional 1-based camera indices along the capture path: pose 2.01 lies between
// the second and third camera, 1% of the way to the third.

struct Viewpoint {
  double pose{1.0};
  CameraParams camera;
  std::optional<std::size_t> source_view; // set for original camera poses
  std::size_t left{0};                     // dataset index of the original at or before pose
  double alpha{0.0};                       // fraction of the way from `left` to the next view
};

struct NavigationSegment {
  int id{0};
  std::vector<std::size_t> source_views; // dataset indices, in path order
  std::vector<Viewpoint> viewpoints;     // originals and interpolated poses, in path order
  std::size_t reference_view{0};         // dataset index
  double pose_begin{1.0};
  double pose_end{1.0};

  /// Position of the reference view within source_views.
  [[nodiscard]] auto reference_slot() const -> std::size_t;
  [[nodiscard]] auto contains(double pose) const noexcept -> bool {
    return pose_begin <= pose && pose <= pose_end;
  }
};

struct NavigationDomain {
  std::vector<CameraParams> path; // every original camera
  std::vector<NavigationSegment> segments;

  [[nodiscard]] auto pose_min() const noexcept -> double { return 1.0; }
  [[nodiscard]] auto pose_max() const noexcept -> double {
    return static_cast<double>(path.size());
  }
};

/// Camera at a fractional pose. Throws std::invalid_argument outside [1, path size].
auto camera_at_pose(const std::vector<CameraParams> &path, double pose) -> CameraParams;

// Groups consecutive runs of `viewsPerSegment` views (the last group may be shorter) and
// spreads `virtualsPerSegment` interpolated poses uniformly over the gaps between a group's
// originals, earlier gaps taking the remainder. Adjacent segments meet halfway between the
// last original of one and the first original of the next.
auto partition_domain(const MultiviewDataset &dataset, std::size_t viewsPerSegment,
                      std::size_t virtualsPerSegment) -> NavigationDomain;

/// Segment whose pose interval contains `pose`; a shared boundary belongs to the lower id.
auto select_segment(const NavigationDomain &domain, double pose) -> int;

/// The segment's source views as a stand-alone dataset.
auto segment_dataset(const MultiviewDataset &dataset, const NavigationSegment &segment)
    -> MultiviewDataset;

} // namespace ldinav
