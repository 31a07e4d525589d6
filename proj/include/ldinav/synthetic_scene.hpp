#pragma once

#include <ldinav/dataset.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace ldinav {

// Smooth procedural texture evaluated in world (x, y) on the plane.
struct PlaneTexture {
  std::array<double, 3> base_rgb{128.0, 128.0, 128.0};
  double amplitude{30.0};   // RGB levels
  double wavelength{0.25};  // world units
};

/// Fronto-parallel world rectangle z = const, x in [x0, x1], y in [y0, y1].
struct PlaneRect {
  double z{};
  double x0{}, x1{}, y0{}, y1{};
  PlaneTexture texture;
};

struct SceneSpec {
  std::vector<PlaneRect> planes;
  std::uint64_t seed{0};
};

struct RayHit {
  std::size_t plane;
  Point3 point;
  double depth; // camera-space z
};

/// Nearest plane hit along the ray through pixel centre (u, v).
auto cast_ray(const SceneSpec &scene, const CameraParams &cam, double u, double v)
    -> std::optional<RayHit>;

/// All plane hits along the ray, sorted front to back.
auto cast_ray_all(const SceneSpec &scene, const CameraParams &cam, double u, double v)
    -> std::vector<RayHit>;

/// Texture colour of a plane at a world point, as RGB.
auto shade(const SceneSpec &scene, std::size_t plane, const Point3 &p)
    -> std::array<std::uint8_t, 3>;

// Horizontal rig of identical pinhole cameras with centres at x = k * baseline.
struct RigSpec {
  int views{4};
  int width{256};
  int height{192};
  double focal{200.0};
  double baseline{0.04};
  double z_near{0.5};
  double z_far{8.0};
};

auto linear_rig(const RigSpec &rig) -> std::vector<CameraParams>;

// Random piecewise-planar scene for a linear rig: a background plane at z = 4 filling every
// view, two rectangles at z = 2 and one or two at z = 1. Rectangle edges fall on pixel
// boundaries of every rig camera, since the disparities per baseline are whole pixels.
auto layered_scene(std::uint64_t seed, const RigSpec &rig = {}) -> SceneSpec;

/// Ray-cast rendering of the scene into each camera, with exact depth maps.
auto generate_synthetic_scene(const SceneSpec &scene, const std::vector<CameraParams> &cams)
    -> MultiviewDataset;

} // namespace ldinav
