#ifndef FREESPACE_SCENEGEN_HPP
#define FREESPACE_SCENEGEN_HPP

// Synthetic road scenes with known geometry: a planar road, box obstacles
// standing on it and a camera driving along the road. Each frame gets a
// sparse structure cloud, a rendered ground-truth mask, a degraded
// segmentation probability map and a flat-shaded RGB image.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "freespace/errors.hpp"
#include "freespace/geom3d.hpp"
#include "freespace/prior_maps.hpp"
#include "freespace/raster.hpp"

namespace freespace {

struct SceneSpec {
  double plane_theta = 0.03;
  double plane_d = 1.6;
  std::vector<OrientedBox> boxes;  // world frame
  CameraModel camera;
  std::vector<PoseSE3> trajectory;  // world-from-camera per frame
  double cloud_density = 10.0;      // points per square meter of surface
  double noise_sigma = 0.0;
  double outlier_fraction = 0.0;
  double label_flip_rate = 0.0;
  std::uint64_t rng_seed = 1;

  // Road patch sampled for the cloud, relative to each frame's camera.
  double road_half_width = 10.0;
  double road_near = 2.0;
  double road_far = 40.0;

  bool valid() const {
    return camera.valid() && !trajectory.empty() && cloud_density >= 0.0 &&
           noise_sigma >= 0.0 && outlier_fraction >= 0.0 && outlier_fraction < 1.0 &&
           label_flip_rate >= 0.0 && label_flip_rate <= 1.0 && road_far > road_near &&
           road_half_width > 0.0;
  }
};

struct FrameBundle {
  PoseSE3 pose;
  std::vector<Vec3> cloud;  // camera frame of this frame
  std::vector<std::uint8_t> is_outlier;
  LabelMask gt_mask;
  ProbMap prob_map;
  RgbImage image;
};

struct Scene {
  RoadPlane plane;  // world frame, keyframe = trajectory[0]
  std::vector<OrientedBox> boxes;
  CameraModel camera;
  std::vector<FrameBundle> frames;
};

/// Unit vector along the road in the direction the camera looks.
inline Vec3 road_forward(const RoadPlane& plane, const PoseSE3& pose) {
  const Vec3 z = pose.rotation.col(2);
  return (z - z.dot(plane.normal) * plane.normal).normalized();
}

/// Point on the road directly below the camera.
inline Vec3 road_foot(const RoadPlane& plane, const PoseSE3& pose) {
  const Vec3 c = pose.camera_center();
  return c - plane.signed_height(c) * plane.normal;
}

/// Box resting on the road, `ahead` meters along the road and `lateral`
/// meters to the right of the camera in `pose`. Extents are full sizes
/// (length along the road, width, height); yaw turns the box about the road
/// normal.
inline OrientedBox box_on_road(const RoadPlane& plane, const PoseSE3& pose,
                               double ahead, double lateral, const Vec3& size,
                               double yaw = 0.0) {
  const Vec3 n = plane.normal;
  const Vec3 fwd = road_forward(plane, pose);
  const Vec3 right = n.cross(fwd);
  const Mat3 turn = rotation_about(n, yaw);
  OrientedBox box;
  box.axes = {turn * fwd, turn * right, n};
  box.half_extents = 0.5 * size;
  box.center = road_foot(plane, pose) + ahead * fwd + lateral * right +
               box.half_extents.z() * n;
  return box;
}

inline std::vector<PoseSE3> straight_trajectory(const RoadPlane& plane,
                                                const PoseSE3& start,
                                                std::size_t frames, double step) {
  const Vec3 fwd = road_forward(plane, start);
  std::vector<PoseSE3> out;
  for (std::size_t k = 0; k < frames; ++k) {
    PoseSE3 p = start;
    p.translation += static_cast<double>(k) * step * fwd;
    out.push_back(p);
  }
  return out;
}

/// Plane theta=0.03, d=1.6; two 4.2 x 1.7 x 1.5 m cars 8 m and 15 m ahead;
/// 640x480 camera with f=525; five frames 1 m apart.
inline SceneSpec default_acceptance_scene() {
  SceneSpec spec;
  spec.plane_theta = 0.03;
  spec.plane_d = 1.6;
  spec.camera = CameraModel{525.0, 525.0, 319.5, 239.5, 640, 480};
  const RoadPlane plane = plane_from_theta_d(spec.plane_theta, spec.plane_d, PoseSE3{});
  spec.trajectory = straight_trajectory(plane, PoseSE3{}, 5, 1.0);
  const Vec3 car(4.2, 1.7, 1.5);
  spec.boxes.push_back(box_on_road(plane, PoseSE3{}, 8.0 + 2.1, 1.8, car));
  spec.boxes.push_back(box_on_road(plane, PoseSE3{}, 15.0 + 2.1, -2.6, car));
  return spec;
}

namespace detail {

inline void sample_rect(const Vec3& origin, const Vec3& a, const Vec3& b,
                        double density, std::mt19937_64& rng,
                        std::vector<Vec3>& out) {
  // origin + s*a + t*b for s, t in [0, 1]
  const double area = a.cross(b).norm();
  const auto count = static_cast<std::size_t>(std::llround(area * density));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = unit(rng);
    const double t = unit(rng);
    out.push_back(origin + s * a + t * b);
  }
}

inline Rgb shade(double r, double g, double b) {
  const auto c = [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  };
  return {c(r), c(g), c(b)};
}

}  // namespace detail

inline Scene gen_scene(const SceneSpec& spec) {
  if (!spec.valid()) throw DomainError("invalid scene specification");
  for (const PoseSE3& p : spec.trajectory) require_valid(p);

  Scene scene;
  scene.camera = spec.camera;
  scene.boxes = spec.boxes;
  scene.plane = plane_from_theta_d(spec.plane_theta, spec.plane_d, spec.trajectory.front());

  const Rgb sky{150, 190, 230};
  const std::vector<Vec3> box_colors = {{170, 40, 40}, {40, 60, 170}, {40, 150, 60},
                                        {200, 160, 30}};

  for (std::size_t f = 0; f < spec.trajectory.size(); ++f) {
    std::mt19937_64 rng(spec.rng_seed ^ static_cast<std::uint64_t>(f));
    FrameBundle frame;
    frame.pose = spec.trajectory[f];
    const PoseSE3 cam_from_world = frame.pose.inverse();

    // Structure: road patch ahead of the camera plus box shells.
    std::vector<Vec3> world;
    const Vec3 n = scene.plane.normal;
    const Vec3 fwd = road_forward(scene.plane, frame.pose);
    const Vec3 right = n.cross(fwd);
    const Vec3 foot = road_foot(scene.plane, frame.pose);
    detail::sample_rect(foot + spec.road_near * fwd - spec.road_half_width * right,
                        (spec.road_far - spec.road_near) * fwd,
                        2.0 * spec.road_half_width * right, spec.cloud_density, rng,
                        world);
    for (const OrientedBox& box : spec.boxes) {
      const Vec3 e0 = 2.0 * box.half_extents[0] * box.axes[0];
      const Vec3 e1 = 2.0 * box.half_extents[1] * box.axes[1];
      const Vec3 e2 = 2.0 * box.half_extents[2] * box.axes[2];
      const Vec3 lo = box.center - 0.5 * (e0 + e1 + e2);
      detail::sample_rect(lo + e2, e0, e1, spec.cloud_density, rng, world);  // top
      detail::sample_rect(lo, e0, e2, spec.cloud_density, rng, world);
      detail::sample_rect(lo + e1, e0, e2, spec.cloud_density, rng, world);
      detail::sample_rect(lo, e1, e2, spec.cloud_density, rng, world);
      detail::sample_rect(lo + e0, e1, e2, spec.cloud_density, rng, world);
    }
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (const Vec3& w : world) {
      Vec3 c = cam_from_world.apply(w);
      if (spec.noise_sigma > 0.0) c += Vec3(noise(rng), noise(rng), noise(rng));
      frame.cloud.push_back(c);
      frame.is_outlier.push_back(0);
    }
    const auto n_out = static_cast<std::size_t>(std::llround(
        spec.outlier_fraction / (1.0 - spec.outlier_fraction) *
        static_cast<double>(world.size())));
    std::uniform_real_distribution<double> ox(-spec.road_half_width, spec.road_half_width);
    std::uniform_real_distribution<double> oy(-spec.plane_d - 1.0, -spec.plane_d + 4.0);
    std::uniform_real_distribution<double> oz(spec.road_near, spec.road_far);
    for (std::size_t i = 0; i < n_out; ++i) {
      const double x = ox(rng);
      const double y = oy(rng);
      const double z = oz(rng);
      frame.cloud.emplace_back(x, y, z);
      frame.is_outlier.push_back(1);
    }

    // Ground truth, image and degraded probabilities.
    const CameraModel& cam = spec.camera;
    frame.gt_mask = LabelMask(cam.width, cam.height, Label::kNotRoad);
    frame.image = RgbImage(cam.width, cam.height, sky);
    frame.prob_map = ProbMap(cam.width, cam.height);
    std::normal_distribution<double> pixel_noise(0.0, 4.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int v = 0; v < cam.height; ++v) {
      for (int u = 0; u < cam.width; ++u) {
        const Ray ray = pixel_ray(cam, frame.pose, u, v);
        const Hit hit = first_hit(ray, scene.plane, spec.boxes);
        const std::size_t idx = frame.gt_mask.index(u, v);
        const double jitter = pixel_noise(rng);
        if (hit.kind == HitKind::kPlane) {
          frame.gt_mask.data[idx] = Label::kRoad;
          // Brighter near the camera, darker toward the horizon.
          const double light = 0.75 + 0.45 * std::exp(-hit.t / 15.0);
          const double g = 115.0 * light + jitter;
          frame.image.data[idx] = detail::shade(g, g, g + 4.0);
        } else if (hit.kind == HitKind::kBox) {
          const Vec3& c = box_colors[hit.box_index % box_colors.size()];
          frame.image.data[idx] =
              detail::shade(c.x() + jitter, c.y() + jitter, c.z() + jitter);
        }
        bool road = frame.gt_mask.data[idx] == Label::kRoad;
        if (unit(rng) < spec.label_flip_rate) road = !road;
        frame.prob_map.s_road[idx] = road ? 0.9f : 0.1f;
        frame.prob_map.s_nonroad_max[idx] = road ? 0.1f : 0.9f;
      }
    }
    scene.frames.push_back(std::move(frame));
  }
  return scene;
}

}  // namespace freespace

#endif  // FREESPACE_SCENEGEN_HPP
