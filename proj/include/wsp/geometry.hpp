#ifndef WSP_GEOMETRY_HPP_
#define WSP_GEOMETRY_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "wsp/errors.hpp"

namespace wsp {

// Image convention, fixed repo-wide: u in [0, W) along width, v in [0, H)
// along height, origin at the top-left, pixel centers at integer coordinates.

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct Point2 {
  double u = 0.0;
  double v = 0.0;
};

inline Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator*(double s, const Point3& p) { return {s * p.x, s * p.y, s * p.z}; }

inline double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Point3& p) { return std::sqrt(dot(p, p)); }
inline double distance(const Point3& a, const Point3& b) { return norm(a - b); }
inline double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.u - b.u, a.v - b.v);
}
inline double squared_pixel_distance(const Point2& a, const Point2& b) {
  const double du = a.u - b.u;
  const double dv = a.v - b.v;
  return du * du + dv * dv;
}

/// Pinhole intrinsics plus a rigid LiDAR-frame -> camera-frame transform.
/// No lens distortion model.
struct CameraModel {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  std::array<double, 9> rotation = {1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
  std::array<double, 3> translation = {0, 0, 0};
  int width = 1;
  int height = 1;

  Point3 to_camera_frame(const Point3& p) const {
    const auto& r = rotation;
    return {r[0] * p.x + r[1] * p.y + r[2] * p.z + translation[0],
            r[3] * p.x + r[4] * p.y + r[5] * p.z + translation[1],
            r[6] * p.x + r[7] * p.y + r[8] * p.z + translation[2]};
  }

  /// Camera center expressed in the LiDAR frame: -R^T t.
  Point3 center_in_lidar_frame() const {
    const auto& r = rotation;
    const auto& t = translation;
    return {-(r[0] * t[0] + r[3] * t[1] + r[6] * t[2]),
            -(r[1] * t[0] + r[4] * t[1] + r[7] * t[2]),
            -(r[2] * t[0] + r[5] * t[1] + r[8] * t[2])};
  }

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw ConfigError("CameraModel: focal lengths must be positive");
    if (width <= 0 || height <= 0) throw ConfigError("CameraModel: image dimensions must be positive");
    const auto& r = rotation;
    // R^T R = I and det(R) = +1, both within 1e-9.
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += r[3 * k + i] * r[3 * k + j];
        const double expected = (i == j) ? 1.0 : 0.0;
        if (std::abs(s - expected) > 1e-9) throw ConfigError("CameraModel: rotation is not orthonormal");
      }
    }
    const double det = r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
                       r[2] * (r[3] * r[7] - r[4] * r[6]);
    if (std::abs(det - 1.0) > 1e-9) throw ConfigError("CameraModel: det(R) != +1");
  }
};

struct Projection {
  Point2 pixel;
  double depth = 0.0;  // z in the camera frame, meters
};

constexpr double kMinProjectionDepth = 1e-6;

inline Projection project(const CameraModel& cam, const Point3& p) {
  const Point3 c = cam.to_camera_frame(p);
  if (c.z <= kMinProjectionDepth) {
    throw NonPositiveDepth("project: point at or behind the camera plane (z_cam = " +
                           std::to_string(c.z) + ")");
  }
  return {{cam.fx * (c.x / c.z) + cam.cx, cam.fy * (c.y / c.z) + cam.cy}, c.z};
}

inline std::vector<Projection> project_cloud(const CameraModel& cam, const std::vector<Point3>& points) {
  std::vector<Projection> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    try {
      out.push_back(project(cam, points[i]));
    } catch (const NonPositiveDepth&) {
      throw NonPositiveDepth("project_cloud: non-positive depth at index " + std::to_string(i));
    }
  }
  return out;
}

/// Closed-form inverse of project: pixel plus camera-frame depth back to the
/// LiDAR frame.
inline Point3 back_project(const CameraModel& cam, const Point2& pixel, double depth) {
  const Point3 c = {depth * (pixel.u - cam.cx) / cam.fx, depth * (pixel.v - cam.cy) / cam.fy, depth};
  const auto& r = cam.rotation;
  const Point3 d = {c.x - cam.translation[0], c.y - cam.translation[1], c.z - cam.translation[2]};
  return {r[0] * d.x + r[3] * d.y + r[6] * d.z,
          r[1] * d.x + r[4] * d.y + r[7] * d.z,
          r[2] * d.x + r[5] * d.y + r[8] * d.z};
}

inline bool on_image(const CameraModel& cam, const Point2& pixel) {
  return pixel.u >= 0.0 && pixel.u < cam.width && pixel.v >= 0.0 && pixel.v < cam.height;
}

/// Rounding convention, fixed repo-wide: half away from zero.
inline int round_half_away(double x) {
  return static_cast<int>(x >= 0.0 ? std::floor(x + 0.5) : std::ceil(x - 0.5));
}

}  // namespace wsp

#endif  // WSP_GEOMETRY_HPP_
