#include <ldinav/geometry.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ldinav {

auto is_orthonormal(const Mat3 &R, double tolerance) -> bool {
  const Mat3 deviation = R * R.transpose() - Mat3::Identity();
  return deviation.cwiseAbs().maxCoeff() <= tolerance;
}

void validate_camera(const CameraParams &cam) {
  if (!(cam.fx > 0.0) || !(cam.fy > 0.0)) {
    throw std::invalid_argument{"camera focal lengths must be positive"};
  }
  if (!(cam.z_near > 0.0) || !(cam.z_far > cam.z_near)) {
    throw std::invalid_argument{"camera depth range must satisfy 0 < z_near < z_far"};
  }
  if (!is_orthonormal(cam.R)) {
    throw std::invalid_argument{"camera rotation is not orthonormal"};
  }
  if (cam.width <= 0 || cam.height <= 0) {
    throw std::invalid_argument{"camera sensor size must be positive"};
  }
}

auto project(const CameraParams &cam, const Point3 &p) -> std::optional<PixelCoord> {
  const Vec3 q = cam.R * p + cam.t;
  if (q.z() <= 0.0) {
    return std::nullopt;
  }
  return PixelCoord{cam.fx * q.x() / q.z() + cam.cx, cam.fy * q.y() / q.z() + cam.cy, q.z()};
}

auto unproject(const CameraParams &cam, const PixelCoord &px) -> Point3 {
  if (!(px.depth > 0.0)) {
    throw std::invalid_argument{"unproject requires positive depth"};
  }
  const Vec3 q{(px.u - cam.cx) * px.depth / cam.fx, (px.v - cam.cy) * px.depth / cam.fy,
               px.depth};
  return cam.R.transpose() * (q - cam.t);
}

auto warp_pixel(const CameraParams &src, const CameraParams &dst, const PixelCoord &px)
    -> std::optional<PixelCoord> {
  return project(dst, unproject(src, px));
}

Warper::Warper(const CameraParams &src, const CameraParams &dst)
    : m_fx{dst.fx}, m_fy{dst.fy}, m_cx{dst.cx}, m_cy{dst.cy} {
  Mat3 Kinv = Mat3::Zero();
  Kinv(0, 0) = 1.0 / src.fx;
  Kinv(0, 2) = -src.cx / src.fx;
  Kinv(1, 1) = 1.0 / src.fy;
  Kinv(1, 2) = -src.cy / src.fy;
  Kinv(2, 2) = 1.0;
  const Mat3 relative = dst.R * src.R.transpose();
  m_A = relative * Kinv;
  m_b = dst.t - relative * src.t;
}

auto Warper::operator()(double u, double v, double depth) const -> std::optional<PixelCoord> {
  const Vec3 q = depth * (m_A * Vec3{u, v, 1.0}) + m_b;
  if (q.z() <= 0.0) {
    return std::nullopt;
  }
  return PixelCoord{m_fx * q.x() / q.z() + m_cx, m_fy * q.y() / q.z() + m_cy, q.z()};
}

namespace {
auto lerp(double a, double b, double alpha) -> double { return (1.0 - alpha) * a + alpha * b; }

auto slerp(Eigen::Quaterniond q0, Eigen::Quaterniond q1, double alpha) -> Eigen::Quaterniond {
  double dot = q0.dot(q1);
  if (dot < 0.0) {
    q1.coeffs() = -q1.coeffs();
    dot = -dot;
  }
  double w0 = 1.0 - alpha;
  double w1 = alpha;
  if (dot < 1.0 - 1e-12) {
    const double theta = std::acos(std::min(dot, 1.0));
    const double s = std::sin(theta);
    w0 = std::sin((1.0 - alpha) * theta) / s;
    w1 = std::sin(alpha * theta) / s;
  }
  Eigen::Quaterniond out;
  out.coeffs() = w0 * q0.coeffs() + w1 * q1.coeffs();
  out.normalize();
  return out;
}

auto precedes(const CameraParams &a, const CameraParams &b) -> bool {
  const auto key = [](const CameraParams &c) {
    return std::array<double, 17>{c.fx,     c.fy,     c.cx,     c.cy,     c.R(0, 0), c.R(0, 1),
                                  c.R(0, 2), c.R(1, 0), c.R(1, 1), c.R(1, 2), c.R(2, 0), c.R(2, 1),
                                  c.R(2, 2), c.t.x(),  c.t.y(),  c.t.z(),  c.z_near};
  };
  return key(a) < key(b) || (key(a) == key(b) && a.z_far < b.z_far);
}

// Weight alpha of b, alpha <= 1/2.
auto blend_cameras(const CameraParams &a, const CameraParams &b, double alpha) -> CameraParams {
  CameraParams out = a;
  out.fx = lerp(a.fx, b.fx, alpha);
  out.fy = lerp(a.fy, b.fy, alpha);
  out.cx = lerp(a.cx, b.cx, alpha);
  out.cy = lerp(a.cy, b.cy, alpha);
  out.z_near = lerp(a.z_near, b.z_near, alpha);
  out.z_far = lerp(a.z_far, b.z_far, alpha);

  const Vec3 ca = a.center();
  const Vec3 cb = b.center();
  const Vec3 center = (1.0 - alpha) * ca + alpha * cb;

  const Eigen::Quaterniond qa{a.R};
  const Eigen::Quaterniond qb{b.R};
  out.R = slerp(qa, qb, alpha).toRotationMatrix();
  out.t = -out.R * center;
  return out;
}
} // namespace

auto interpolate_cameras(const CameraParams &a, const CameraParams &b, double alpha)
    -> CameraParams {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument{"interpolation weight must lie in [0, 1]"};
  }
  if (a.width != b.width || a.height != b.height) {
    throw std::invalid_argument{"interpolated cameras must share the sensor size"};
  }
  if (alpha == 0.0 || a == b) {
    return a;
  }
  if (alpha == 1.0) {
    return b;
  }
  // Both argument orders reduce to the same blend: the leading camera gets the weight
  // big >= 1/2 and the other 1 - big, which is exact. Exact halves fall back to a fixed order.
  const double big = alpha < 0.5 ? 1.0 - alpha : alpha;
  const bool aLeads = big == 0.5 ? !precedes(b, a) : alpha < 0.5;
  return aLeads ? blend_cameras(a, b, 1.0 - big) : blend_cameras(b, a, 1.0 - big);
}

auto rotation_angle(const Mat3 &R) -> double {
  const double c = std::clamp((R.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

auto make_camera(double f, double cx, double cy, int width, int height, const Vec3 &center,
                 double zNear, double zFar) -> CameraParams {
  CameraParams cam;
  cam.fx = f;
  cam.fy = f;
  cam.cx = cx;
  cam.cy = cy;
  cam.R = Mat3::Identity();
  cam.t = -center;
  cam.z_near = zNear;
  cam.z_far = zFar;
  cam.width = width;
  cam.height = height;
  return cam;
}

} // namespace ldinav
