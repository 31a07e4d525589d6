#include <ldinav/synthetic_scene.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ldinav {

namespace {
auto ray_direction(const CameraParams &cam, double u, double v) -> Vec3 {
  const Vec3 q{(u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0};
  return cam.R.transpose() * q;
}

auto hit_plane(const PlaneRect &plane, const CameraParams &cam, const Vec3 &origin,
               const Vec3 &dir) -> std::optional<std::pair<Point3, double>> {
  if (std::abs(dir.z()) < 1e-15) {
    return std::nullopt;
  }
  const double s = (plane.z - origin.z()) / dir.z();
  if (s <= 0.0) {
    return std::nullopt;
  }
  Point3 p = origin + s * dir;
  p.z() = plane.z;
  if (p.x() < plane.x0 || p.x() > plane.x1 || p.y() < plane.y0 || p.y() > plane.y1) {
    return std::nullopt;
  }
  const double depth = (cam.R * p + cam.t).z();
  if (depth <= 0.0) {
    return std::nullopt;
  }
  return std::pair{p, depth};
}
} // namespace

auto cast_ray_all(const SceneSpec &scene, const CameraParams &cam, double u, double v)
    -> std::vector<RayHit> {
  const Vec3 origin = cam.center();
  const Vec3 dir = ray_direction(cam, u, v);
  std::vector<RayHit> hits;
  for (std::size_t k = 0; k < scene.planes.size(); ++k) {
    if (const auto hit = hit_plane(scene.planes[k], cam, origin, dir)) {
      hits.push_back(RayHit{k, hit->first, hit->second});
    }
  }
  std::stable_sort(hits.begin(), hits.end(),
                   [](const RayHit &a, const RayHit &b) { return a.depth < b.depth; });
  return hits;
}

auto cast_ray(const SceneSpec &scene, const CameraParams &cam, double u, double v)
    -> std::optional<RayHit> {
  auto hits = cast_ray_all(scene, cam, u, v);
  if (hits.empty()) {
    return std::nullopt;
  }
  return hits.front();
}

auto shade(const SceneSpec &scene, std::size_t plane, const Point3 &p)
    -> std::array<std::uint8_t, 3> {
  const auto &tex = scene.planes[plane].texture;
  // Phases depend only on (seed, plane) so every camera sees the same surface.
  std::mt19937_64 rng{scene.seed * 0x9E3779B97F4A7C15ULL + plane};
  std::uniform_real_distribution<double> phase{0.0, 2.0 * std::numbers::pi};
  std::array<std::uint8_t, 3> rgb{};
  const double kx = 2.0 * std::numbers::pi / tex.wavelength;
  const double ky = 2.0 * std::numbers::pi / (1.37 * tex.wavelength);
  for (std::size_t c = 0; c < 3; ++c) {
    const double px = phase(rng);
    const double py = phase(rng);
    const double value = tex.base_rgb[c] + tex.amplitude * (0.6 * std::sin(kx * p.x() + px) +
                                                            0.4 * std::sin(ky * p.y() + py));
    rgb[c] = static_cast<std::uint8_t>(std::clamp(std::floor(value + 0.5), 0.0, 255.0));
  }
  return rgb;
}

auto generate_synthetic_scene(const SceneSpec &scene, const std::vector<CameraParams> &cams)
    -> MultiviewDataset {
  if (scene.planes.empty()) {
    throw std::invalid_argument{"synthetic scene has no planes"};
  }
  if (cams.empty()) {
    throw std::invalid_argument{"synthetic scene needs at least one camera"};
  }
  MultiviewDataset dataset;
  for (const auto &cam : cams) {
    validate_camera(cam);
    ViewData view{cam, ViewImage{cam.width, cam.height}, DepthMap{cam.width, cam.height}};
    for (int y = 0; y < cam.height; ++y) {
      for (int x = 0; x < cam.width; ++x) {
        const auto hit = cast_ray(scene, cam, x, y);
        if (!hit) {
          continue;
        }
        const auto rgb = shade(scene, hit->plane, hit->point);
        const auto ycc = rgb_to_ycbcr(rgb[0], rgb[1], rgb[2]);
        view.image.y(x, y) = ycc[0];
        view.image.cb(x, y) = ycc[1];
        view.image.cr(x, y) = ycc[2];
        view.depth.depth(x, y) = hit->depth;
        view.depth.valid(x, y) = 1;
      }
    }
    dataset.views.push_back(std::move(view));
  }
  validate_dataset(dataset);
  return dataset;
}

auto linear_rig(const RigSpec &rig) -> std::vector<CameraParams> {
  std::vector<CameraParams> cams;
  for (int k = 0; k < rig.views; ++k) {
    cams.push_back(make_camera(rig.focal, 0.5 * (rig.width - 1), 0.5 * (rig.height - 1),
                               rig.width, rig.height, Vec3{k * rig.baseline, 0.0, 0.0},
                               rig.z_near, rig.z_far));
  }
  return cams;
}

auto layered_scene(std::uint64_t seed, const RigSpec &rig) -> SceneSpec {
  std::mt19937_64 rng{seed};
  auto uniform = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>{lo, hi}(rng); };
  auto level = [&rng] { return std::uniform_real_distribution<double>{70.0, 185.0}(rng); };

  const double cx = 0.5 * (rig.width - 1);
  const double cy = 0.5 * (rig.height - 1);
  const double refX = ((rig.views - 1) / 2) * rig.baseline;
  // World coordinate of the pixel boundary n + 1/2 in the reference camera at depth z.
  auto edgeX = [&](int n, double z) { return refX + z * (n + 0.5 - cx) / rig.focal; };
  auto edgeY = [&](int n, double z) { return z * (n + 0.5 - cy) / rig.focal; };

  SceneSpec scene;
  scene.seed = seed;
  auto texture = [&](double z) {
    return PlaneTexture{{level(), level(), level()}, 30.0, 0.25 * z};
  };
  scene.planes.push_back({4.0, -1e3, 1e3, -1e3, 1e3, texture(4.0)});

  auto addRect = [&](double z, int minW, int maxW, int minH, int maxH) {
    const int w = uniform(minW, maxW);
    const int h = uniform(minH, maxH);
    const int x = uniform(4, rig.width - w - 4);
    const int y = uniform(4, rig.height - h - 4);
    scene.planes.push_back(
        {z, edgeX(x - 1, z), edgeX(x + w - 1, z), edgeY(y - 1, z), edgeY(y + h - 1, z),
         texture(z)});
  };
  const int mids = 2;
  const int fronts = uniform(1, 2);
  for (int i = 0; i < mids; ++i) {
    addRect(2.0, rig.width / 5, rig.width / 3, rig.height / 4, rig.height / 2);
  }
  for (int i = 0; i < fronts; ++i) {
    addRect(1.0, rig.width / 8, rig.width / 4, rig.height / 6, rig.height / 3);
  }
  return scene;
}

} // namespace ldinav
