#ifndef FREESPACE_GEOM3D_HPP
#define FREESPACE_GEOM3D_HPP

// Camera model, rigid poses, the parametric road plane, oriented obstacle
// boxes and the ray casts between them.
//
// Camera frame: x right, y up, z forward along the principal axis. Image
// rows grow downward, so pixel v maps to camera y = -(v - cy) / fy.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>

#include "freespace/errors.hpp"

namespace freespace {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct CameraModel {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  bool valid() const {
    return fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx >= 0.0 &&
           cx < width && cy >= 0.0 && cy < height;
  }
};

inline void require_valid(const CameraModel& cam) {
  if (!cam.valid()) throw InvariantViolation("camera model is invalid");
}

/// World-from-camera rigid transform: X_world = rotation * X_cam + translation.
struct PoseSE3 {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static PoseSE3 identity() { return {}; }

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
  Vec3 camera_center() const { return translation; }

  PoseSE3 inverse() const {
    PoseSE3 inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }

  /// (this * other)(x) == this(other(x))
  PoseSE3 compose(const PoseSE3& other) const {
    PoseSE3 out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
  }

  bool valid(double tol = 1e-9) const {
    if (!rotation.allFinite() || !translation.allFinite()) return false;
    const double ortho =
        (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
  }
};

inline void require_valid(const PoseSE3& pose) {
  if (!pose.valid()) throw InvariantViolation("pose rotation is not in SO(3)");
}

inline Mat3 rotation_about(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();

  Vec3 at(double t) const { return origin + t * direction; }
};

/// Road plane in the (theta, d) parameterization of a keyframe camera,
/// together with its world-frame normal form normal . X = offset. The normal
/// points toward the camera, so heights above the road are positive.
struct RoadPlane {
  double theta = 0.0;
  double dist = 1.0;
  PoseSE3 keyframe_pose;
  Vec3 normal = Vec3::UnitY();
  double offset = -1.0;

  double signed_height(const Vec3& world_point) const {
    return normal.dot(world_point) - offset;
  }

  /// Residual of z sin(theta) - y cos(theta) = d cos(theta) for a point given
  /// in the keyframe camera frame.
  double camera_residual(const Vec3& cam_point) const {
    return cam_point.z() * std::sin(theta) - cam_point.y() * std::cos(theta) -
           dist * std::cos(theta);
  }
};

struct OrientedBox {
  Vec3 center = Vec3::Zero();
  std::array<Vec3, 3> axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  Vec3 half_extents = Vec3::Constant(0.5);

  Mat3 axis_matrix() const {
    Mat3 a;
    a.col(0) = axes[0];
    a.col(1) = axes[1];
    a.col(2) = axes[2];
    return a;
  }

  Vec3 to_local(const Vec3& world_point) const {
    return axis_matrix().transpose() * (world_point - center);
  }

  bool contains(const Vec3& world_point, double tol = 0.0) const {
    const Vec3 local = to_local(world_point);
    for (int k = 0; k < 3; ++k) {
      if (std::abs(local[k]) > half_extents[k] + tol) return false;
    }
    return true;
  }

  bool valid(double tol = 1e-9) const {
    for (int i = 0; i < 3; ++i) {
      if (std::abs(axes[i].norm() - 1.0) > tol) return false;
      if (!(half_extents[i] > 0.0)) return false;
      for (int j = i + 1; j < 3; ++j) {
        if (std::abs(axes[i].dot(axes[j])) > tol) return false;
      }
    }
    return center.allFinite();
  }
};

inline Ray pixel_ray(const CameraModel& cam, const PoseSE3& pose, double u,
                     double v) {
  if (!(u >= 0.0 && u < cam.width && v >= 0.0 && v < cam.height)) {
    std::ostringstream msg;
    msg << "pixel (" << u << ", " << v << ") outside " << cam.width << "x"
        << cam.height << " image";
    throw DomainError(msg.str());
  }
  const Vec3 cam_dir((u - cam.cx) / cam.fx, -(v - cam.cy) / cam.fy, 1.0);
  Ray ray;
  ray.origin = pose.translation;
  ray.direction = (pose.rotation * cam_dir).normalized();
  return ray;
}

/// Pinhole projection of a world point; empty when the point is not in front
/// of the camera.
inline std::optional<Eigen::Vector2d> project(const CameraModel& cam,
                                              const PoseSE3& pose,
                                              const Vec3& world_point) {
  const Vec3 c = pose.rotation.transpose() * (world_point - pose.translation);
  if (!(c.z() > 0.0)) return std::nullopt;
  return Eigen::Vector2d(cam.cx + cam.fx * c.x() / c.z(),
                         cam.cy - cam.fy * c.y() / c.z());
}

inline RoadPlane plane_from_theta_d(double theta, double d,
                                    const PoseSE3& keyframe_pose) {
  const double c = std::cos(theta);
  if (!(std::abs(theta) < M_PI / 2) || !(c > 0.0)) {
    throw DomainError("plane angle must satisfy |theta| < pi/2");
  }
  if (!(d > 0.0)) throw DomainError("plane distance must be positive");
  RoadPlane plane;
  plane.theta = theta;
  plane.dist = d;
  plane.keyframe_pose = keyframe_pose;
  // Camera frame: (0, cos, -sin) . X = -d cos, camera center on the + side.
  const Vec3 cam_normal(0.0, c, -std::sin(theta));
  const double cam_offset = -d * c;
  plane.normal = keyframe_pose.rotation * cam_normal;
  plane.offset = cam_offset + plane.normal.dot(keyframe_pose.translation);
  return plane;
}

struct PlaneIntersection {
  double t;
  Vec3 point;
};

inline constexpr double kParallelTolerance = 1e-12;

inline std::optional<PlaneIntersection> ray_plane_intersect(
    const Ray& ray, const RoadPlane& plane) {
  const double denom = plane.normal.dot(ray.direction);
  if (std::abs(denom) < kParallelTolerance) return std::nullopt;
  const double t = (plane.offset - plane.normal.dot(ray.origin)) / denom;
  if (!(t > 0.0) || !std::isfinite(t)) return std::nullopt;
  return PlaneIntersection{t, ray.at(t)};
}

/// Slab test in the box frame. Returns the entry distance, or the exit
/// distance when the ray starts inside the box.
inline std::optional<double> ray_box_intersect(const Ray& ray,
                                               const OrientedBox& box) {
  const Mat3 axes = box.axis_matrix();
  const Vec3 o = axes.transpose() * (ray.origin - box.center);
  const Vec3 d = axes.transpose() * ray.direction;
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    const double h = box.half_extents[k];
    if (std::abs(d[k]) < kParallelTolerance) {
      if (std::abs(o[k]) > h) return std::nullopt;
      continue;
    }
    double t0 = (-h - o[k]) / d[k];
    double t1 = (h - o[k]) / d[k];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  if (!(t_far > 0.0)) return std::nullopt;
  return t_near > 0.0 ? t_near : t_far;
}

enum class HitKind { kPlane, kBox, kMiss };

struct Hit {
  HitKind kind = HitKind::kMiss;
  double t = std::numeric_limits<double>::infinity();
  std::size_t box_index = 0;
};

/// Nearest forward hit. Equal distances resolve to the box.
inline Hit first_hit(const Ray& ray, const RoadPlane& plane,
                     std::span<const OrientedBox> boxes) {
  Hit best;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (auto t = ray_box_intersect(ray, boxes[i]); t && *t < best.t) {
      best = {HitKind::kBox, *t, i};
    }
  }
  if (auto p = ray_plane_intersect(ray, plane); p && p->t < best.t) {
    best = {HitKind::kPlane, p->t, 0};
  }
  return best;
}

}  // namespace freespace

#endif  // FREESPACE_GEOM3D_HPP
