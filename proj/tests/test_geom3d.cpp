#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "freespace/geom3d.hpp"
#include "test_util.hpp"

using namespace freespace;
using freespace::testing::random_box;
using freespace::testing::random_pose;
using freespace::testing::random_unit;
using freespace::testing::random_vec;

namespace {

const CameraModel kCam100{100.0, 100.0, 50.0, 50.0, 101, 101};

OrientedBox unit_box_at(const Vec3& center, double half) {
  OrientedBox b;
  b.center = center;
  b.half_extents = Vec3::Constant(half);
  return b;
}

Ray ray_from(const Vec3& origin, const Vec3& dir) { return Ray{origin, dir.normalized()}; }

}  // namespace

TEST(PixelRay, PrincipalPointMapsToOpticalAxis) {
  const Ray r = pixel_ray(kCam100, PoseSE3::identity(), 50.0, 50.0);
  EXPECT_NEAR((r.origin - Vec3::Zero()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((r.direction - Vec3::UnitZ()).norm(), 0.0, 1e-15);
}

TEST(PixelRay, OneFocalLengthRightIs45Degrees) {
  const CameraModel cam{100.0, 100.0, 50.0, 50.0, 200, 100};
  const Ray r = pixel_ray(cam, PoseSE3::identity(), 150.0, 50.0);
  EXPECT_NEAR((r.direction - Vec3(1, 0, 1).normalized()).norm(), 0.0, 1e-12);
}

TEST(PixelRay, RotatedTranslatedPose) {
  PoseSE3 pose;
  // 90 degrees about y, written out by hand: x -> -z, z -> x.
  pose.rotation << 0, 0, 1, 0, 1, 0, -1, 0, 0;
  pose.translation = Vec3(1, 2, 3);
  const Ray r = pixel_ray(kCam100, pose, 50.0, 50.0);
  EXPECT_NEAR((r.origin - Vec3(1, 2, 3)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((r.direction - Vec3(1, 0, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((rotation_about(Vec3::UnitY(), M_PI / 2) - pose.rotation).norm(), 0.0, 1e-12);
}

TEST(PixelRay, ImageRowsGrowDownward) {
  const Ray below = pixel_ray(kCam100, PoseSE3::identity(), 50.0, 90.0);
  EXPECT_LT(below.direction.y(), 0.0);
}

TEST(PixelRay, OutOfBoundsThrows) {
  EXPECT_THROW(pixel_ray(kCam100, PoseSE3::identity(), -1.0, 0.0), DomainError);
  EXPECT_THROW(pixel_ray(kCam100, PoseSE3::identity(), 0.0, 101.0), DomainError);
  EXPECT_THROW(pixel_ray(kCam100, PoseSE3::identity(), 101.0, 0.0), DomainError);
}

TEST(PixelRay, ReprojectionRoundTrip) {
  std::mt19937_64 rng(11);
  const CameraModel cam{525.0, 520.0, 319.5, 239.5, 640, 480};
  std::uniform_real_distribution<double> uu(0.0, 639.999), vv(0.0, 479.999), depth(0.5, 80.0);
  for (int i = 0; i < 1000; ++i) {
    const PoseSE3 pose = random_pose(rng);
    const double u = uu(rng), v = vv(rng);
    const Ray r = pixel_ray(cam, pose, u, v);
    const auto px = project(cam, pose, r.at(depth(rng)));
    ASSERT_TRUE(px.has_value());
    EXPECT_NEAR(px->x(), u, 1e-6);
    EXPECT_NEAR(px->y(), v, 1e-6);
  }
}

TEST(PlaneFromThetaD, LevelPlane) {
  const RoadPlane p = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  EXPECT_NEAR((p.normal - Vec3::UnitY()).norm(), 0.0, 1e-15);
  EXPECT_NEAR(p.offset, -1.5, 1e-15);
  EXPECT_NEAR(p.signed_height(Vec3(3.0, -1.5, 7.0)), 0.0, 1e-12);
  EXPECT_GT(p.signed_height(Vec3::Zero()), 0.0);
}

TEST(PlaneFromThetaD, FortyFiveDegrees) {
  const RoadPlane p = plane_from_theta_d(M_PI / 4, 2.0, PoseSE3::identity());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 50; ++i) {
    const double y = u(rng);
    const Vec3 x(u(rng), y, y + 2.0);  // z - y = 2
    EXPECT_NEAR(p.signed_height(x), 0.0, 1e-12);
    EXPECT_NEAR(p.camera_residual(x), 0.0, 1e-12);
  }
}

TEST(PlaneFromThetaD, TranslatedKeyframe) {
  PoseSE3 pose;
  pose.translation = Vec3(0, 0, 10);
  const RoadPlane p = plane_from_theta_d(0.1, 1.6, pose);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int i = 0; i < 100; ++i) {
    // Camera-frame point on the road: choose x, z and solve for y.
    const double x = u(rng), z = u(rng);
    const double y = (z * std::sin(0.1) - 1.6 * std::cos(0.1)) / std::cos(0.1);
    EXPECT_NEAR(p.normal.dot(pose.apply(Vec3(x, y, z))) - p.offset, 0.0, 1e-9);
  }
}

TEST(PlaneFromThetaD, RoundTripUnderRandomPoses) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> th(-1.2, 1.2), dd(0.2, 5.0), u(-30, 30);
  for (int trial = 0; trial < 100; ++trial) {
    const PoseSE3 pose = random_pose(rng);
    const double theta = th(rng), d = dd(rng);
    const RoadPlane p = plane_from_theta_d(theta, d, pose);
    EXPECT_NEAR(p.normal.norm(), 1.0, 1e-12);
    EXPECT_GT(p.signed_height(pose.camera_center()), 0.0);
    // Sample the world plane and check the road equation in the keyframe camera frame.
    const Vec3 a = (std::abs(p.normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY())
                       .cross(p.normal)
                       .normalized();
    const Vec3 b = p.normal.cross(a);
    const PoseSE3 inv = pose.inverse();
    for (int i = 0; i < 20; ++i) {
      const Vec3 x = p.offset * p.normal + u(rng) * a + u(rng) * b;
      EXPECT_NEAR(p.camera_residual(inv.apply(x)), 0.0, 1e-9);
    }
  }
}

TEST(PlaneFromThetaD, RejectsDegenerate) {
  EXPECT_THROW(plane_from_theta_d(M_PI / 2, 1.0, PoseSE3::identity()), DomainError);
  EXPECT_THROW(plane_from_theta_d(2.0, 1.0, PoseSE3::identity()), DomainError);
  EXPECT_THROW(plane_from_theta_d(0.0, 0.0, PoseSE3::identity()), DomainError);
}

TEST(RayPlane, StraightDown) {
  const RoadPlane p = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  const auto hit = ray_plane_intersect(ray_from(Vec3::Zero(), Vec3(0, -1, 0)), p);
  ASSERT_TRUE(hit);
  EXPECT_NEAR(hit->t, 1.5, 1e-12);
  EXPECT_NEAR((hit->point - Vec3(0, -1.5, 0)).norm(), 0.0, 1e-12);
}

TEST(RayPlane, ParallelMisses) {
  const RoadPlane p = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  EXPECT_FALSE(ray_plane_intersect(ray_from(Vec3::Zero(), Vec3(1, 0, 0)), p));
}

TEST(RayPlane, Oblique) {
  const RoadPlane p = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  const auto hit = ray_plane_intersect(ray_from(Vec3::Zero(), Vec3(0, -1, 1)), p);
  ASSERT_TRUE(hit);
  EXPECT_NEAR(hit->t, 1.5 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR((hit->point - Vec3(0, -1.5, 1.5)).norm(), 0.0, 1e-12);
}

TEST(RayPlane, BehindMisses) {
  const RoadPlane p = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  EXPECT_FALSE(ray_plane_intersect(ray_from(Vec3::Zero(), Vec3(0, 1, 0)), p));
}

TEST(RayBox, AxisAlignedHit) {
  const auto t = ray_box_intersect(ray_from(Vec3::Zero(), Vec3::UnitZ()),
                                   unit_box_at(Vec3(0, 0, 5), 0.5));
  ASSERT_TRUE(t);
  EXPECT_NEAR(*t, 4.5, 1e-12);
}

TEST(RayBox, AxisAlignedMiss) {
  EXPECT_FALSE(ray_box_intersect(ray_from(Vec3::Zero(), Vec3::UnitX()),
                                 unit_box_at(Vec3(0, 0, 5), 0.5)));
}

TEST(RayBox, Rotated45AgreesWithDenseSampling) {
  OrientedBox box = unit_box_at(Vec3(0, 0, 5), 0.5);
  const Mat3 r = rotation_about(Vec3::UnitY(), M_PI / 4);
  for (int k = 0; k < 3; ++k) box.axes[k] = r.col(k);
  const Ray ray = ray_from(Vec3::Zero(), Vec3::UnitZ());
  const auto t = ray_box_intersect(ray, box);
  ASSERT_TRUE(t);
  EXPECT_NEAR(*t, 5.0 - 0.5 * std::sqrt(2.0), 1e-12);
  double first_inside = -1.0;
  for (int i = 0; i <= 1000000; ++i) {
    const double s = 10.0 * i / 1000000.0;
    if (box.contains(ray.at(s))) {
      first_inside = s;
      break;
    }
  }
  EXPECT_NEAR(first_inside, *t, 2e-5);
}

TEST(RayBox, StartingInsideReturnsExit) {
  const auto t = ray_box_intersect(ray_from(Vec3(0, 0, 5), Vec3::UnitZ()),
                                   unit_box_at(Vec3(0, 0, 5), 0.5));
  ASSERT_TRUE(t);
  EXPECT_NEAR(*t, 0.5, 1e-12);
}

TEST(RayBox, BehindMisses) {
  EXPECT_FALSE(ray_box_intersect(ray_from(Vec3::Zero(), -Vec3::UnitZ()),
                                 unit_box_at(Vec3(0, 0, 5), 0.5)));
}

TEST(RayBox, RigidTransformInvariance) {
  std::mt19937_64 rng(23);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const OrientedBox box = random_box(rng);
    // Aim roughly at the box so a good share of cases are hits.
    const Vec3 origin = random_vec(rng, -15, 15);
    const Vec3 target = box.center + random_vec(rng, -1.5, 1.5);
    const Ray ray = ray_from(origin, target - origin);
    const PoseSE3 g = random_pose(rng);
    OrientedBox moved = box;
    moved.center = g.apply(box.center);
    for (int k = 0; k < 3; ++k) moved.axes[k] = g.rotation * box.axes[k];
    const Ray moved_ray{g.apply(ray.origin), g.rotation * ray.direction};
    const auto a = ray_box_intersect(ray, box);
    const auto b = ray_box_intersect(moved_ray, moved);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) {
      ++hits;
      EXPECT_NEAR(*a, *b, 1e-9);
    }
  }
  EXPECT_GT(hits, 200);
}

TEST(FirstHit, PlaneOnly) {
  const RoadPlane p = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  const Hit h = first_hit(ray_from(Vec3::Zero(), Vec3(0, -1, 0)), p, {});
  EXPECT_EQ(h.kind, HitKind::kPlane);
  EXPECT_NEAR(h.t, 1.5, 1e-12);
}

TEST(FirstHit, BoxWhenPlaneMissed) {
  const RoadPlane p = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  const std::vector<OrientedBox> boxes{unit_box_at(Vec3(0, 0, 5), 0.5)};
  const Hit h = first_hit(ray_from(Vec3::Zero(), Vec3::UnitZ()), p, boxes);
  EXPECT_EQ(h.kind, HitKind::kBox);
  EXPECT_NEAR(h.t, 4.5, 1e-12);
  EXPECT_EQ(h.box_index, 0u);
}

TEST(FirstHit, NearerBoxBeatsPlane) {
  // Plane y = -7 hit at t = 7 by a straight-down ray; box spans t in [3, 4].
  const RoadPlane p = plane_from_theta_d(0.0, 7.0, PoseSE3::identity());
  const std::vector<OrientedBox> boxes{unit_box_at(Vec3(0, -3.5, 0), 0.5)};
  const Ray ray = ray_from(Vec3::Zero(), Vec3(0, -1, 0));
  const Hit h = first_hit(ray, p, boxes);
  EXPECT_EQ(h.kind, HitKind::kBox);
  EXPECT_NEAR(h.t, 3.0, 1e-12);
  EXPECT_NEAR(*ray_box_intersect(ray, boxes[0]), 3.0, 1e-12);
  EXPECT_NEAR(ray_plane_intersect(ray, p)->t, 7.0, 1e-12);
}

TEST(FirstHit, TieGoesToBox) {
  // Box bottom face lies exactly on the plane y = -1.5.
  const RoadPlane p = plane_from_theta_d(0.0, 1.5, PoseSE3::identity());
  const std::vector<OrientedBox> boxes{unit_box_at(Vec3(0, -2.0, 0), 0.5)};
  const Hit h = first_hit(ray_from(Vec3::Zero(), Vec3(0, -1, 0)), p, boxes);
  EXPECT_EQ(h.kind, HitKind::kBox);
  EXPECT_EQ(h.t, 1.5);
}

TEST(FirstHit, MatchesBruteForceOnRandomScenes) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> th(-0.5, 0.5), dd(0.5, 3.0);
  std::uniform_int_distribution<int> nb(0, 4);
  for (int scene = 0; scene < 1000; ++scene) {
    const RoadPlane plane = plane_from_theta_d(th(rng), dd(rng), random_pose(rng));
    std::vector<OrientedBox> boxes;
    for (int i = nb(rng); i > 0; --i) boxes.push_back(random_box(rng));
    const Ray ray = ray_from(random_vec(rng, -5, 5), random_unit(rng));
    const Hit h = first_hit(ray, plane, boxes);

    double best_box = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const auto t = ray_box_intersect(ray, boxes[i]);
      if (t && *t < best_box) {
        best_box = *t;
        best_index = i;
      }
    }
    const auto pt = ray_plane_intersect(ray, plane);
    const double plane_t = pt ? pt->t : std::numeric_limits<double>::infinity();
    if (pt && plane_t < best_box) {
      EXPECT_EQ(h.kind, HitKind::kPlane);
      EXPECT_EQ(h.t, plane_t);
    } else if (std::isfinite(best_box)) {
      EXPECT_EQ(h.kind, HitKind::kBox);
      EXPECT_EQ(h.t, best_box);
      EXPECT_EQ(h.box_index, best_index);
    } else {
      EXPECT_EQ(h.kind, HitKind::kMiss);
    }
  }
}

TEST(PoseSE3, InverseAndCompose) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    const PoseSE3 a = random_pose(rng), b = random_pose(rng);
    const Vec3 x = random_vec(rng, -10, 10);
    EXPECT_NEAR((a.inverse().apply(a.apply(x)) - x).norm(), 0.0, 1e-12);
    EXPECT_NEAR((a.compose(b).apply(x) - a.apply(b.apply(x))).norm(), 0.0, 1e-12);
    EXPECT_TRUE(a.valid());
  }
  PoseSE3 bad;
  bad.rotation(0, 0) = -1.0;  // reflection, det = -1
  EXPECT_FALSE(bad.valid());
}

TEST(CameraModel, Validity) {
  EXPECT_TRUE(kCam100.valid());
  EXPECT_FALSE((CameraModel{0.0, 1.0, 0.0, 0.0, 10, 10}.valid()));
  EXPECT_FALSE((CameraModel{1.0, 1.0, 10.0, 0.0, 10, 10}.valid()));
}
