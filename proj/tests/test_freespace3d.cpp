#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "freespace/freespace3d.hpp"
#include "freespace/scenegen.hpp"

using namespace freespace;

namespace {

const CameraModel kCam{100.0, 100.0, 50.0, 40.0, 101, 81};

PoseSE3 pitched_down(double angle) {
  PoseSE3 p;
  p.rotation = rotation_about(Vec3::UnitX(), angle);
  return p;
}

}  // namespace

TEST(Backproject, EmptyMask) {
  const RoadPlane plane = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  const LabelMask mask(kCam.width, kCam.height, Label::kNotRoad);
  const auto cloud = backproject_mask(mask, kCam, pitched_down(0.3), plane, {1, 60.0}, "f0");
  EXPECT_TRUE(cloud.points.empty());
  EXPECT_EQ(cloud.frame_id, "f0");
}

TEST(Backproject, PrincipalPointAt45Degrees) {
  const RoadPlane plane = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  LabelMask mask(kCam.width, kCam.height, Label::kNotRoad);
  mask.at(50, 40) = Label::kRoad;
  const PoseSE3 pose = pitched_down(M_PI / 4);
  const auto cloud = backproject_mask(mask, kCam, pose, plane, {1, 60.0});
  ASSERT_EQ(cloud.points.size(), 1u);
  EXPECT_NEAR(cloud.points[0].norm(), 1.5 / std::sin(M_PI / 4), 1e-12);
  EXPECT_NEAR(cloud.points[0].y(), -1.5, 1e-12);
}

TEST(Backproject, AboveHorizonSkipped) {
  const RoadPlane plane = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  LabelMask mask(kCam.width, kCam.height, Label::kNotRoad);
  mask.at(50, 0) = Label::kRoad;   // looking up
  mask.at(50, 40) = Label::kRoad;  // level ray, parallel to the road
  const auto cloud = backproject_mask(mask, kCam, PoseSE3::identity(), plane, {1, 1e9});
  EXPECT_TRUE(cloud.points.empty());
}

TEST(Backproject, FarPointsBeyondTMaxSkipped) {
  const RoadPlane plane = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  LabelMask mask(kCam.width, kCam.height, Label::kNotRoad);
  mask.at(50, 41) = Label::kRoad;  // grazing: t = 1.5 * sqrt(100^2 + 1) ~ 150
  EXPECT_TRUE(backproject_mask(mask, kCam, PoseSE3::identity(), plane, {1, 60.0}).points.empty());
  EXPECT_EQ(backproject_mask(mask, kCam, PoseSE3::identity(), plane, {1, 200.0}).points.size(),
            1u);
}

TEST(Backproject, OnPlaneReprojectsAndRespectsStrideBound) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin(0.7);
  const PoseSE3 pose = pitched_down(0.35);
  const RoadPlane plane = plane_from_theta_d(0.02, 1.6, PoseSE3::identity());
  LabelMask mask(kCam.width, kCam.height);
  for (auto& l : mask.data) l = coin(rng) ? Label::kRoad : Label::kNotRoad;
  std::size_t road = 0;
  for (auto l : mask.data) road += l == Label::kRoad;
  for (int stride : {1, 2, 3, 4}) {
    const auto cloud = backproject_mask(mask, kCam, pose, plane, {stride, 60.0});
    EXPECT_LE(cloud.points.size(),
              (road + stride * stride - 1) / static_cast<std::size_t>(stride * stride));
    for (const Vec3& p : cloud.points) {
      EXPECT_LE(std::abs(plane.signed_height(p)), 1e-6);
      const auto px = project(kCam, pose, p);
      ASSERT_TRUE(px);
      const double u = std::round(px->x()), v = std::round(px->y());
      EXPECT_LE(std::hypot(px->x() - u, px->y() - v), 0.5);
      EXPECT_EQ(mask.at(static_cast<int>(u), static_cast<int>(v)), Label::kRoad);
    }
  }
}

TEST(Backproject, FullMaskStrideOneEmitsEveryGroundPixel) {
  const PoseSE3 pose = pitched_down(0.5);
  const RoadPlane plane = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  const LabelMask mask(kCam.width, kCam.height, Label::kRoad);
  std::size_t expected = 0;
  for (int v = 0; v < kCam.height; ++v) {
    for (int u = 0; u < kCam.width; ++u) {
      const auto hit = ray_plane_intersect(pixel_ray(kCam, pose, u, v), plane);
      expected += hit && hit->t <= 60.0;
    }
  }
  EXPECT_EQ(backproject_mask(mask, kCam, pose, plane, {1, 60.0}).points.size(), expected);
}

TEST(Backproject, RejectsBadArguments) {
  const RoadPlane plane = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  const LabelMask mask(kCam.width, kCam.height);
  EXPECT_THROW(backproject_mask(mask, kCam, PoseSE3::identity(), plane, {0, 60.0}),
               DomainError);
  EXPECT_THROW(backproject_mask(LabelMask(3, 3), kCam, PoseSE3::identity(), plane, {1, 60.0}),
               DimensionMismatch);
}

TEST(Overlay, EmptyMaskUnchanged) {
  const RgbImage img(4, 3, Rgb{10, 20, 30});
  EXPECT_EQ(export_overlay(img, LabelMask(4, 3, Label::kNotRoad), Rgb{255, 0, 255}), img);
}

TEST(Overlay, FullMaskBlend) {
  const RgbImage img(4, 3, Rgb{100, 100, 100});
  const RgbImage out = export_overlay(img, LabelMask(4, 3, Label::kRoad), Rgb{255, 0, 255});
  for (const Rgb& p : out.data) EXPECT_EQ(p, (Rgb{177, 50, 177}));
}

TEST(Overlay, CheckerboardChangesOnlyMasked) {
  const RgbImage img(6, 5, Rgb{100, 100, 100});
  LabelMask mask(6, 5);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 6; ++x) mask.at(x, y) = (x + y) % 2 ? Label::kRoad : Label::kNotRoad;
  }
  const RgbImage out = export_overlay(img, mask, Rgb{255, 0, 255});
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 6; ++x) {
      EXPECT_EQ(out.at(x, y) != img.at(x, y), mask.at(x, y) == Label::kRoad);
    }
  }
}
