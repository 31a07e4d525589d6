#include <ldinav/navigation.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ldinav {

auto NavigationSegment::reference_slot() const -> std::size_t {
  const auto it = std::find(source_views.begin(), source_views.end(), reference_view);
  return static_cast<std::size_t>(it - source_views.begin());
}

auto camera_at_pose(const std::vector<CameraParams> &path, double pose) -> CameraParams {
  const auto n = static_cast<double>(path.size());
  if (path.empty() || !(pose >= 1.0 && pose <= n)) {
    throw std::invalid_argument{"pose " + std::to_string(pose) + " outside [1, " +
                                std::to_string(path.size()) + "]"};
  }
  const double base = std::floor(pose);
  const auto i = static_cast<std::size_t>(base);
  if (i == path.size()) {
    return path.back();
  }
  const double frac = pose - base;
  if (frac == 0.0) {
    return path[i - 1];
  }
  return interpolate_cameras(path[i - 1], path[i], frac);
}

auto partition_domain(const MultiviewDataset &dataset, std::size_t viewsPerSegment,
                      std::size_t virtualsPerSegment) -> NavigationDomain {
  if (viewsPerSegment == 0) {
    throw std::invalid_argument{"views per segment must be positive"};
  }
  if (viewsPerSegment > dataset.size()) {
    throw std::invalid_argument{"views per segment (" + std::to_string(viewsPerSegment) +
                                ") exceeds dataset size (" + std::to_string(dataset.size()) +
                                ")"};
  }
  NavigationDomain domain;
  for (const auto &view : dataset.views) {
    domain.path.push_back(view.camera);
  }

  for (std::size_t first = 0; first < dataset.size(); first += viewsPerSegment) {
    NavigationSegment seg;
    seg.id = static_cast<int>(domain.segments.size());
    const std::size_t m = std::min(viewsPerSegment, dataset.size() - first);
    for (std::size_t k = 0; k < m; ++k) {
      seg.source_views.push_back(first + k);
    }
    seg.reference_view = seg.source_views[(m - 1) / 2];

    const std::size_t gaps = m - 1;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t view = first + k;
      const double pose = static_cast<double>(view + 1);
      seg.viewpoints.push_back({pose, dataset.views[view].camera, view, view, 0.0});
      if (k == gaps) {
        break;
      }
      const std::size_t inGap = virtualsPerSegment / gaps + (k < virtualsPerSegment % gaps ? 1 : 0);
      for (std::size_t j = 1; j <= inGap; ++j) {
        const double alpha = static_cast<double>(j) / static_cast<double>(inGap + 1);
        seg.viewpoints.push_back({pose + alpha,
                                  interpolate_cameras(dataset.views[view].camera,
                                                      dataset.views[view + 1].camera, alpha),
                                  std::nullopt, view, alpha});
      }
    }
    seg.pose_begin = static_cast<double>(first + 1);
    seg.pose_end = static_cast<double>(first + m);
    domain.segments.push_back(std::move(seg));
  }

  for (std::size_t s = 1; s < domain.segments.size(); ++s) {
    auto &lower = domain.segments[s - 1];
    auto &upper = domain.segments[s];
    const double boundary = 0.5 * (lower.pose_end + upper.pose_begin);
    lower.pose_end = boundary;
    upper.pose_begin = boundary;
  }
  return domain;
}

auto select_segment(const NavigationDomain &domain, double pose) -> int {
  if (domain.segments.empty() || !(pose >= domain.pose_min() && pose <= domain.pose_max())) {
    throw std::invalid_argument{"pose " + std::to_string(pose) + " outside the navigation domain"};
  }
  for (const auto &seg : domain.segments) {
    if (pose <= seg.pose_end) {
      return seg.id;
    }
  }
  return domain.segments.back().id;
}

auto segment_dataset(const MultiviewDataset &dataset, const NavigationSegment &segment)
    -> MultiviewDataset {
  MultiviewDataset out;
  for (const auto index : segment.source_views) {
    out.views.push_back(dataset.views.at(index));
  }
  return out;
}

} // namespace ldinav
