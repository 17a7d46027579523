#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "freespace/prior_maps.hpp"
#include "freespace/scenegen.hpp"
#include "test_util.hpp"

using namespace freespace;

namespace {

const CameraModel kSmallCam{80.0, 80.0, 39.5, 29.5, 80, 60};

PoseSE3 pitched_down(double angle) {
  PoseSE3 p;
  // Positive rotation about x turns +z toward -y (down) under y-up.
  p.rotation = rotation_about(Vec3::UnitX(), angle);
  return p;
}

IndicatorMap brute_force_indicator(const CameraModel& cam, const PoseSE3& pose,
                                   const RoadPlane& plane,
                                   const std::vector<OrientedBox>& boxes) {
  IndicatorMap ind(cam.width, cam.height, 0);
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const Ray ray = pixel_ray(cam, pose, u, v);
      double box_t = std::numeric_limits<double>::infinity();
      for (const OrientedBox& b : boxes) {
        if (auto t = ray_box_intersect(ray, b)) box_t = std::min(box_t, *t);
      }
      const auto pt = ray_plane_intersect(ray, plane);
      ind.at(u, v) = pt && pt->t < box_t ? 1 : 0;
    }
  }
  return ind;
}

UnaryField single_pixel(double road, double nonroad) {
  UnaryField f(1, 1);
  f.cost_road[0] = road;
  f.cost_nonroad[0] = nonroad;
  return f;
}

}  // namespace

TEST(IndicatorMap, HorizonSplit) {
  const PoseSE3 pose = pitched_down(0.1);
  const RoadPlane plane = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  const IndicatorMap ind = indicator_map(kSmallCam, pose, plane, {});
  for (int v = 0; v < kSmallCam.height; ++v) {
    for (int u = 0; u < kSmallCam.width; ++u) {
      const bool hits = ray_plane_intersect(pixel_ray(kSmallCam, pose, u, v), plane).has_value();
      EXPECT_EQ(ind.at(u, v), hits ? 1 : 0);
    }
  }
  // Bottom row sees road, top row sees sky.
  EXPECT_EQ(ind.at(40, kSmallCam.height - 1), 1);
  EXPECT_EQ(ind.at(40, 0), 0);
  // Rows below a road pixel are road.
  for (int u = 0; u < kSmallCam.width; ++u) {
    for (int v = 1; v < kSmallCam.height; ++v) {
      if (ind.at(u, v - 1)) EXPECT_EQ(ind.at(u, v), 1);
    }
  }
}

TEST(IndicatorMap, OccludingBox) {
  const PoseSE3 pose = pitched_down(0.15);
  const RoadPlane plane = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  OrientedBox box;
  box.center = pose.apply(Vec3(0, 0, 6));
  box.half_extents = Vec3(1.0, 1.0, 1.0);
  const std::vector<OrientedBox> boxes{box};
  const IndicatorMap ind = indicator_map(kSmallCam, pose, plane, boxes);
  EXPECT_EQ(ind, brute_force_indicator(kSmallCam, pose, plane, boxes));
  EXPECT_EQ(ind.at(40, 30), 0);
}

TEST(IndicatorMap, LookingAtSky) {
  const PoseSE3 pose = pitched_down(-1.2);
  const RoadPlane plane = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  const IndicatorMap ind = indicator_map(kSmallCam, pose, plane, {});
  for (auto v : ind.data) EXPECT_EQ(v, 0);
}

TEST(IndicatorMap, RandomScenesMatchBruteForce) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ahead(4.0, 25.0), side(-4.0, 4.0), yaw(-0.5, 0.5);
  for (int s = 0; s < 10; ++s) {
    const RoadPlane plane = plane_from_theta_d(0.02 * s - 0.1, 1.4 + 0.05 * s,
                                               PoseSE3::identity());
    std::vector<OrientedBox> boxes;
    for (int b = 0; b < 3; ++b) {
      boxes.push_back(box_on_road(plane, PoseSE3::identity(), ahead(rng), side(rng),
                                  Vec3(4.0, 1.8, 1.5), yaw(rng)));
    }
    EXPECT_EQ(indicator_map(kSmallCam, PoseSE3::identity(), plane, boxes),
              brute_force_indicator(kSmallCam, PoseSE3::identity(), plane, boxes));
  }
}

TEST(TransferPriors, IdentityIsExact) {
  std::mt19937_64 rng(1);
  const RoadPlane plane = plane_from_theta_d(0.05, 1.6, freespace::testing::random_pose(rng));
  const std::vector<OrientedBox> boxes{freespace::testing::random_box(rng),
                                       freespace::testing::random_box(rng)};
  const auto [p, b] = transfer_priors(plane, boxes, PoseSE3::identity());
  EXPECT_EQ(p.normal, plane.normal);
  EXPECT_EQ(p.offset, plane.offset);
  EXPECT_EQ(p.theta, plane.theta);
  EXPECT_EQ(p.dist, plane.dist);
  ASSERT_EQ(b.size(), boxes.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(b[i].center, boxes[i].center);
    EXPECT_EQ(b[i].half_extents, boxes[i].half_extents);
    for (int k = 0; k < 3; ++k) EXPECT_EQ(b[i].axes[k], boxes[i].axes[k]);
  }
}

TEST(TransferPriors, PureTranslation) {
  const RoadPlane plane = plane_from_theta_d(0.05, 1.6, PoseSE3::identity());
  OrientedBox box;
  box.center = Vec3(1, 0, 8);
  const std::vector<OrientedBox> boxes{box};
  PoseSE3 rel;
  rel.translation = Vec3(0, 0, -1);
  const auto [p, b] = transfer_priors(plane, boxes, rel);
  EXPECT_NEAR((b[0].center - Vec3(1, 0, 7)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(p.offset, plane.offset + plane.normal.dot(Vec3(0, 0, -1)), 1e-15);
}

TEST(TransferPriors, RigidMotionKeepsPlanePoints) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int trial = 0; trial < 20; ++trial) {
    const RoadPlane plane = plane_from_theta_d(0.05, 1.6, freespace::testing::random_pose(rng));
    const PoseSE3 rel = freespace::testing::random_pose(rng);
    const auto [p, b] = transfer_priors(plane, {}, rel);
    const Vec3 a = plane.normal.unitOrthogonal();
    const Vec3 c = plane.normal.cross(a);
    for (int i = 0; i < 100; ++i) {
      const Vec3 x = plane.offset * plane.normal + u(rng) * a + u(rng) * c;
      EXPECT_NEAR(p.normal.dot(rel.apply(x)) - p.offset, 0.0, 1e-9);
    }
    EXPECT_NEAR(p.normal.norm(), 1.0, 1e-12);
    // (normal, offset) stays consistent with (theta, d, keyframe_pose).
    const RoadPlane rebuilt = plane_from_theta_d(p.theta, p.dist, p.keyframe_pose);
    EXPECT_NEAR((rebuilt.normal - p.normal).norm(), 0.0, 1e-9);
    EXPECT_NEAR(rebuilt.offset - p.offset, 0.0, 1e-9);
  }
}

TEST(TransferPriors, RoundTrip) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const RoadPlane plane = plane_from_theta_d(0.05, 1.6, freespace::testing::random_pose(rng));
    const std::vector<OrientedBox> boxes{freespace::testing::random_box(rng)};
    const PoseSE3 rel = freespace::testing::random_pose(rng);
    const auto [p1, b1] = transfer_priors(plane, boxes, rel);
    const auto [p2, b2] = transfer_priors(p1, b1, rel.inverse());
    EXPECT_NEAR((p2.normal - plane.normal).norm(), 0.0, 1e-9);
    EXPECT_NEAR(p2.offset - plane.offset, 0.0, 1e-9);
    EXPECT_NEAR((b2[0].center - boxes[0].center).norm(), 0.0, 1e-9);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR((b2[0].axes[k] - boxes[0].axes[k]).norm(), 0.0, 1e-9);
    }
    EXPECT_TRUE(b1[0].valid());
  }
}

TEST(UnaryFromIndicator, DefaultWeights) {
  IndicatorMap ind(2, 1, 0);
  ind.data = {1, 0};
  const UnaryField f = unary_from_indicator(ind, 0.9, 0.9);
  EXPECT_EQ(f.cost_road[0], 0.0);
  EXPECT_EQ(f.cost_nonroad[0], 0.9);
  EXPECT_EQ(f.cost_road[1], 0.9);
  EXPECT_EQ(f.cost_nonroad[1], 0.0);
}

TEST(UnaryFromIndicator, ZeroWeightsAndSlackness) {
  IndicatorMap ind(4, 4, 0);
  for (std::size_t i = 0; i < ind.size(); ++i) ind.data[i] = i % 3 == 0;
  const UnaryField zero = unary_from_indicator(ind, 0.0, 0.0);
  for (std::size_t i = 0; i < zero.size(); ++i) {
    EXPECT_EQ(zero.cost_road[i], 0.0);
    EXPECT_EQ(zero.cost_nonroad[i], 0.0);
  }
  const UnaryField f = unary_from_indicator(ind, 0.7, 0.4);
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_TRUE((f.cost_road[i] == 0.0) != (f.cost_nonroad[i] == 0.0));
  }
  EXPECT_THROW(unary_from_indicator(ind, -1.0, 0.0), DomainError);
}

TEST(UnaryFromProbmap, Examples) {
  ProbMap pm(1, 1);
  pm.s_road[0] = 0.8f;
  pm.s_nonroad_max[0] = 0.15f;
  const UnaryField f = unary_from_probmap(pm, 1.0);
  EXPECT_NEAR(f.cost_road[0], 0.15, 1e-7);
  EXPECT_NEAR(f.cost_nonroad[0], 0.8, 1e-7);

  ProbMap zeros(3, 2);
  const UnaryField z = unary_from_probmap(zeros, 1.0);
  for (double c : z.cost_nonroad) EXPECT_EQ(c, 0.0);

  ProbMap half(1, 1);
  half.s_road[0] = 0.5f;
  half.s_nonroad_max[0] = 0.5f;
  const UnaryField h = unary_from_probmap(half, 2.0);
  EXPECT_EQ(h.cost_road[0], 1.0);
  EXPECT_EQ(h.cost_nonroad[0], 1.0);
}

TEST(AccumulateUnaries, ZeroFieldIsNeutral) {
  const UnaryField a = single_pixel(0.3, 0.6);
  const UnaryField parts[] = {a, UnaryField(1, 1)};
  EXPECT_EQ(accumulate_unaries(parts), a);
}

TEST(AccumulateUnaries, HandSum) {
  IndicatorMap ind(1, 1, 1);
  ProbMap pm(1, 1);
  pm.s_road[0] = 0.8f;
  pm.s_nonroad_max[0] = 0.15f;
  const UnaryField d1 = unary_from_indicator(ind, 0.9, 0.9);
  const UnaryField d2 = unary_from_indicator(ind, 0.9, 0.9);
  const UnaryField d3 = unary_from_probmap(pm, 1.0);
  const UnaryField parts[] = {d1, d2, d3};
  const UnaryField sum = accumulate_unaries(parts);
  EXPECT_NEAR(sum.cost_road[0], 0.15, 1e-7);
  EXPECT_NEAR(sum.cost_nonroad[0], 2.6, 1e-7);
}

TEST(AccumulateUnaries, OrderInvariant) {
  const UnaryField a = single_pixel(0.1, 0.2), b = single_pixel(0.3, 0.4);
  const UnaryField ab[] = {a, b};
  const UnaryField ba[] = {b, a};
  EXPECT_EQ(accumulate_unaries(ab), accumulate_unaries(ba));
}

TEST(AccumulateUnaries, MismatchThrows) {
  const UnaryField parts[] = {UnaryField(2, 2), UnaryField(2, 3)};
  EXPECT_THROW(accumulate_unaries(parts), DimensionMismatch);
}

TEST(TemporalPrior, IdentityTransferGivesD1) {
  const RoadPlane plane = plane_from_theta_d(0.03, 1.6, PoseSE3::identity());
  const std::vector<OrientedBox> boxes{
      box_on_road(plane, PoseSE3::identity(), 8.0, 1.0, Vec3(4.2, 1.7, 1.5))};
  const PoseSE3 pose = PoseSE3::identity();
  const UnaryField d1 =
      unary_from_indicator(indicator_map(kSmallCam, pose, plane, boxes), 0.9, 0.9);
  const auto [p, b] = transfer_priors(plane, boxes, PoseSE3::identity());
  const UnaryField d2 = unary_from_indicator(indicator_map(kSmallCam, pose, p, b), 0.9, 0.9);
  EXPECT_EQ(d1, d2);
}
