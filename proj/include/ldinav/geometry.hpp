#pragma once

#include <Eigen/Core>

#include <optional>

namespace ldinav {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Point3 = Eigen::Vector3d;

// Pinhole camera. Extrinsics map world to camera: p_cam = R * p_world + t.
// Depth everywhere in this library is camera-space z, not ray length.
struct CameraParams {
  double fx{1.0};
  double fy{1.0};
  double cx{0.0};
  double cy{0.0};
  Mat3 R{Mat3::Identity()};
  Vec3 t{Vec3::Zero()};
  double z_near{0.1};
  double z_far{100.0};
  int width{0};
  int height{0};

  /// Camera centre in world coordinates, -R^T t.
  [[nodiscard]] auto center() const -> Vec3 { return -R.transpose() * t; }

  friend auto operator==(const CameraParams &, const CameraParams &) -> bool = default;
};

/// Continuous image position plus camera-space depth.
struct PixelCoord {
  double u{};
  double v{};
  double depth{};
};

auto is_orthonormal(const Mat3 &R, double tolerance = 1e-9) -> bool;

/// Throws std::invalid_argument naming the violated camera invariant.
void validate_camera(const CameraParams &cam);

/// Returns nullopt when the point is on or behind the camera plane.
auto project(const CameraParams &cam, const Point3 &p) -> std::optional<PixelCoord>;

auto unproject(const CameraParams &cam, const PixelCoord &px) -> Point3;

auto warp_pixel(const CameraParams &src, const CameraParams &dst, const PixelCoord &px)
    -> std::optional<PixelCoord>;

// Precomputed src -> dst warp. For a source pixel (u, v, z) the destination camera-space
// point is z * A * (u, v, 1) + b, so per-pixel cost is one 3x3 product.
class Warper {
public:
  Warper(const CameraParams &src, const CameraParams &dst);

  [[nodiscard]] auto operator()(double u, double v, double depth) const
      -> std::optional<PixelCoord>;

private:
  Mat3 m_A;
  Vec3 m_b;
  double m_fx, m_fy, m_cx, m_cy;
};

/// Linear centre/intrinsics/depth-range blend with shortest-arc rotation slerp.
/// interpolate_cameras(a, b, s) and interpolate_cameras(b, a, 1 - s) are bit-identical.
auto interpolate_cameras(const CameraParams &a, const CameraParams &b, double alpha)
    -> CameraParams;

/// Rotation angle in radians of a rotation matrix.
auto rotation_angle(const Mat3 &R) -> double;

/// Camera with identity rotation centred at `center`.
auto make_camera(double f, double cx, double cy, int width, int height, const Vec3 &center,
                 double zNear, double zFar) -> CameraParams;

} // namespace ldinav
