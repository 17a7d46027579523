#ifndef FREESPACE_PRIOR_MAPS_HPP
#define FREESPACE_PRIOR_MAPS_HPP

// Per-pixel data costs. Three sources contribute:
//   - the indicator of the current frame's plane/box priors,
//   - the same indicator for the previous frame's priors moved into the
//     current frame,
//   - the external segmenter's road / best-non-road probabilities.

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "freespace/errors.hpp"
#include "freespace/geom3d.hpp"
#include "freespace/raster.hpp"

namespace freespace {

/// 1 where the pixel ray reaches the road plane before any box, else 0.
using IndicatorMap = Raster<std::uint8_t>;

struct ProbMap {
  int width = 0;
  int height = 0;
  std::vector<float> s_road;
  std::vector<float> s_nonroad_max;

  ProbMap() = default;
  ProbMap(int w, int h)
      : width(w),
        height(h),
        s_road(static_cast<std::size_t>(w) * h, 0.0f),
        s_nonroad_max(static_cast<std::size_t>(w) * h, 0.0f) {}

  std::size_t size() const { return s_road.size(); }
  bool operator==(const ProbMap&) const = default;
};

struct CrfWeights {
  double w1 = 0.9;
  double w2 = 0.9;
  double w3 = 1.0;

  bool valid() const { return w1 >= 0.0 && w2 >= 0.0 && w3 >= 0.0; }
};

struct UnaryField {
  int width = 0;
  int height = 0;
  std::vector<double> cost_road;
  std::vector<double> cost_nonroad;

  UnaryField() = default;
  UnaryField(int w, int h)
      : width(w),
        height(h),
        cost_road(static_cast<std::size_t>(w) * h, 0.0),
        cost_nonroad(static_cast<std::size_t>(w) * h, 0.0) {}

  std::size_t size() const { return cost_road.size(); }
  bool operator==(const UnaryField&) const = default;
};

inline IndicatorMap indicator_map(const CameraModel& cam, const PoseSE3& pose,
                                  const RoadPlane& plane,
                                  std::span<const OrientedBox> boxes) {
  require_valid(cam);
  require_valid(pose);
  IndicatorMap ind(cam.width, cam.height, 0);
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const Ray ray = pixel_ray(cam, pose, u, v);
      ind.at(u, v) = first_hit(ray, plane, boxes).kind == HitKind::kPlane;
    }
  }
  return ind;
}

/// Rigidly moves priors by `relative_pose` (previous world -> current world).
/// The plane keeps its (theta, d) and its keyframe pose is carried along.
inline std::pair<RoadPlane, std::vector<OrientedBox>> transfer_priors(
    const RoadPlane& plane, std::span<const OrientedBox> boxes,
    const PoseSE3& relative_pose) {
  require_valid(relative_pose);
  const Mat3& R = relative_pose.rotation;
  const Vec3& t = relative_pose.translation;

  RoadPlane moved = plane;
  moved.keyframe_pose = relative_pose.compose(plane.keyframe_pose);
  moved.normal = R * plane.normal;
  moved.offset = plane.offset + moved.normal.dot(t);

  std::vector<OrientedBox> moved_boxes;
  moved_boxes.reserve(boxes.size());
  for (const OrientedBox& b : boxes) {
    OrientedBox m = b;
    m.center = R * b.center + t;
    for (int k = 0; k < 3; ++k) m.axes[k] = R * b.axes[k];
    moved_boxes.push_back(m);
  }
  return {moved, std::move(moved_boxes)};
}

/// road costs w_road_miss where the indicator is 0, non-road costs
/// w_plane_hit where it is 1.
inline UnaryField unary_from_indicator(const IndicatorMap& ind,
                                       double w_road_miss, double w_plane_hit) {
  if (!(w_road_miss >= 0.0) || !(w_plane_hit >= 0.0)) {
    throw DomainError("indicator weights must be non-negative");
  }
  UnaryField f(ind.width, ind.height);
  for (std::size_t i = 0; i < ind.size(); ++i) {
    const double hit = ind.data[i] ? 1.0 : 0.0;
    f.cost_road[i] = w_road_miss * (1.0 - hit);
    f.cost_nonroad[i] = w_plane_hit * hit;
  }
  return f;
}

inline UnaryField unary_from_probmap(const ProbMap& probs, double w3) {
  if (!(w3 >= 0.0)) throw DomainError("segmentation weight must be non-negative");
  UnaryField f(probs.width, probs.height);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    f.cost_road[i] = w3 * static_cast<double>(probs.s_nonroad_max[i]);
    f.cost_nonroad[i] = w3 * static_cast<double>(probs.s_road[i]);
  }
  return f;
}

inline UnaryField accumulate_unaries(std::span<const UnaryField> fields) {
  if (fields.empty()) return {};
  UnaryField sum(fields.front().width, fields.front().height);
  for (const UnaryField& f : fields) {
    if (f.width != sum.width || f.height != sum.height) {
      throw DimensionMismatch("unary fields differ in size");
    }
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum.cost_road[i] += f.cost_road[i];
      sum.cost_nonroad[i] += f.cost_nonroad[i];
    }
  }
  return sum;
}

}  // namespace freespace

#endif  // FREESPACE_PRIOR_MAPS_HPP
