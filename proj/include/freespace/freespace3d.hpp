#ifndef FREESPACE_FREESPACE3D_HPP
#define FREESPACE_FREESPACE3D_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "freespace/errors.hpp"
#include "freespace/geom3d.hpp"
#include "freespace/raster.hpp"

namespace freespace {

struct FreeSpaceCloud {
  std::vector<Vec3> points;
  std::string frame_id;
};

struct BackprojectConfig {
  int stride = 2;
  double t_max = 60.0;
};

/// Road pixels lifted onto the road plane. With stride s the image is tiled
/// into s x s blocks; a fully-road block contributes the intersection of its
/// top-left pixel ray. Rays with no forward hit within t_max are skipped.
inline FreeSpaceCloud backproject_mask(const LabelMask& mask,
                                       const CameraModel& cam,
                                       const PoseSE3& pose,
                                       const RoadPlane& plane,
                                       const BackprojectConfig& cfg,
                                       std::string frame_id = {}) {
  if (cfg.stride < 1) throw DomainError("stride must be at least 1");
  if (mask.width != cam.width || mask.height != cam.height) {
    throw DimensionMismatch("mask does not match camera size");
  }
  FreeSpaceCloud cloud;
  cloud.frame_id = std::move(frame_id);
  const int s = cfg.stride;
  for (int by = 0; by + s <= mask.height; by += s) {
    for (int bx = 0; bx + s <= mask.width; bx += s) {
      bool full = true;
      for (int y = by; y < by + s && full; ++y) {
        for (int x = bx; x < bx + s; ++x) {
          if (mask.at(x, y) != Label::kRoad) {
            full = false;
            break;
          }
        }
      }
      if (!full) continue;
      const auto hit = ray_plane_intersect(pixel_ray(cam, pose, bx, by), plane);
      if (hit && hit->t <= cfg.t_max) cloud.points.push_back(hit->point);
    }
  }
  return cloud;
}

/// Road pixels averaged with `tint`, rounding down.
inline RgbImage export_overlay(const RgbImage& image, const LabelMask& mask,
                               const Rgb& tint) {
  require_same_shape(image, mask, "overlay");
  RgbImage out = image;
  const auto blend = [](std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>((static_cast<unsigned>(a) + b) / 2);
  };
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask.data[i] != Label::kRoad) continue;
    out.data[i] = {blend(image.data[i].r, tint.r), blend(image.data[i].g, tint.g),
                   blend(image.data[i].b, tint.b)};
  }
  return out;
}

}  // namespace freespace

#endif  // FREESPACE_FREESPACE3D_HPP
