#ifndef FREESPACE_OBSTACLE_BOXES_HPP
#define FREESPACE_OBSTACLE_BOXES_HPP

// Obstacle priors: points above the road are grouped with k-means and each
// group gets an enclosing box aligned with its in-plane principal axes and
// the road normal.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "freespace/errors.hpp"
#include "freespace/geom3d.hpp"

namespace freespace {

inline constexpr double kMinHalfExtent = 1e-3;

struct ClusterSet {
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<Vec3> centroids;
  std::size_t K = 0;
  // Sum of squared distances to the assigned centroid, recorded after every
  // assignment step.
  std::vector<double> objective_trace;
};

inline std::vector<std::size_t> points_above_plane(std::span<const Vec3> points,
                                                   const RoadPlane& plane,
                                                   double h_min, double h_max) {
  if (!(h_min >= 0.0) || !(h_max > h_min)) {
    throw DomainError("height band must satisfy 0 <= h_min < h_max");
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double h = plane.signed_height(points[i]);
    if (h > h_min && h <= h_max) out.push_back(i);
  }
  return out;
}

/// Lloyd's algorithm from k-means++ seeds. Seeding stops early once every
/// point coincides with a chosen center, and clusters left empty are dropped,
/// so the returned K may be smaller than requested. Indices in the result
/// refer to positions in `points`.
inline ClusterSet kmeans(std::span<const Vec3> points, std::size_t K,
                         std::uint64_t seed, std::size_t max_iters) {
  if (points.empty()) throw DomainError("k-means needs at least one point");
  if (K == 0) throw DomainError("k-means needs K >= 1");
  const std::size_t n = points.size();
  std::mt19937_64 rng(seed);

  std::vector<Vec3> centers;
  centers.reserve(K);
  centers.push_back(points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (points[i] - centers[0]).squaredNorm();
  while (centers.size() < K) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0)) break;
    double r = std::uniform_real_distribution<double>(0.0, total)(rng);
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      r -= d2[i];
      if (r < 0.0 && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
    if (!(d2[pick] > 0.0)) {
      // Rounding ran past the end; take the last point with positive weight.
      for (std::size_t i = n; i-- > 0;) {
        if (d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points[i] - centers.back()).squaredNorm());
    }
  }

  const std::size_t k = centers.size();
  std::vector<std::size_t> assign(n, std::numeric_limits<std::size_t>::max());
  ClusterSet out;
  for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iters, 1); ++iter) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dist = (points[i] - centers[c]).squaredNorm();
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      objective += best_d;
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    out.objective_trace.push_back(objective);
    if (!changed) break;

    std::vector<Vec3> sums(k, Vec3::Zero());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[assign[i]] += points[i];
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) centers[c] = sums[c] / static_cast<double>(counts[c]);
    }
  }

  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < n; ++i) members[assign[i]].push_back(i);
  for (std::size_t c = 0; c < k; ++c) {
    if (members[c].empty()) continue;
    Vec3 mean = Vec3::Zero();
    for (std::size_t i : members[c]) mean += points[i];
    out.centroids.push_back(mean / static_cast<double>(members[c].size()));
    out.clusters.push_back(std::move(members[c]));
  }
  out.K = out.clusters.size();
  return out;
}

namespace detail {

// Unit vectors e1, e2 spanning the plane orthogonal to n.
inline std::pair<Vec3, Vec3> tangent_basis(const Vec3& n) {
  Vec3 helper = Vec3::UnitX();
  if (std::abs(n.x()) > std::abs(n.y()) && std::abs(n.x()) > std::abs(n.z())) {
    helper = Vec3::UnitY();
  }
  const Vec3 e1 = (helper - helper.dot(n) * n).normalized();
  return {e1, n.cross(e1)};
}

}  // namespace detail

inline OrientedBox fit_box(std::span<const Vec3> cluster_points,
                           const RoadPlane& plane) {
  if (cluster_points.empty()) throw DomainError("cannot fit a box to no points");
  const Vec3 n = plane.normal.normalized();
  const auto [e1, e2] = detail::tangent_basis(n);

  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : cluster_points) mean += p;
  mean /= static_cast<double>(cluster_points.size());

  double saa = 0.0, sab = 0.0, sbb = 0.0;
  for (const Vec3& p : cluster_points) {
    const Vec3 q = p - mean;
    const double a = q.dot(e1);
    const double b = q.dot(e2);
    saa += a * a;
    sab += a * b;
    sbb += b * b;
  }
  // Major eigenvector of [[saa, sab], [sab, sbb]] in closed form.
  double va = 1.0, vb = 0.0;
  const double half_diff = 0.5 * (saa - sbb);
  const double lambda = 0.5 * (saa + sbb) + std::hypot(half_diff, sab);
  const double scale = std::max({saa, sbb, 1e-300});
  if (std::abs(sab) > 1e-15 * scale) {
    va = lambda - sbb;
    vb = sab;
  } else if (sbb > saa) {
    va = 0.0;
    vb = 1.0;
  }
  const Vec3 u1 = (va * e1 + vb * e2).normalized();
  const Vec3 u2 = n.cross(u1);

  OrientedBox box;
  box.axes = {u1, u2, n};
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const Vec3& p : cluster_points) {
    for (int k = 0; k < 3; ++k) {
      const double s = box.axes[k].dot(p);
      lo[k] = std::min(lo[k], s);
      hi[k] = std::max(hi[k], s);
    }
  }
  box.center = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    box.center += 0.5 * (lo[k] + hi[k]) * box.axes[k];
    box.half_extents[k] = std::max(0.5 * (hi[k] - lo[k]), kMinHalfExtent);
  }
  return box;
}

/// Single-linkage grouping: points closer than `link_distance` share a
/// group. Returns one group id per point, ids numbered from 0.
inline std::vector<std::size_t> spatial_groups(std::span<const Vec3> points,
                                               double link_distance) {
  const std::size_t n = points.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  const auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  const double link2 = link_distance * link_distance;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((points[i] - points[j]).squaredNorm() > link2) continue;
      const std::size_t a = find(i);
      const std::size_t b = find(j);
      if (a != b) parent[a] = b;
    }
  }
  std::vector<std::size_t> id(n, n), out(n);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (id[r] == n) id[r] = next++;
    out[i] = id[r];
  }
  return out;
}

inline constexpr std::size_t kMaxClusters = 32;

struct ObstacleConfig {
  double h_min = 0.15;
  double h_max = 3.5;
  // 0 picks one cluster per spatially separated group (capped at 32).
  std::size_t K = 0;
  double link_distance = 0.5;
  // Groups smaller than this are treated as stray points and not boxed.
  std::size_t min_group_size = 10;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  // k-means runs with seeds seed, seed + 1, ...; the lowest objective wins.
  std::size_t restarts = 5;
  // Extend every box down to the road so rays cannot pass under obstacles
  // whose lowest points were removed by the h_min band.
  bool ground_boxes = true;
};

/// Lowers the bottom face of `box` (whose third axis is the road normal) to
/// the plane, keeping the top face. Boxes already reaching the road are
/// returned unchanged.
inline OrientedBox ground_box(const OrientedBox& box, const RoadPlane& plane) {
  const Vec3& n = box.axes[2];
  const double top = plane.signed_height(box.center) + box.half_extents[2];
  const double bottom = plane.signed_height(box.center) - box.half_extents[2];
  if (!(bottom > 0.0) || !(top > 0.0)) return box;
  OrientedBox grounded = box;
  grounded.half_extents[2] = 0.5 * top;
  grounded.center = box.center + (0.5 * top - (top - box.half_extents[2])) * n;
  return grounded;
}

inline std::vector<OrientedBox> fit_obstacles(std::span<const Vec3> points,
                                              const RoadPlane& plane,
                                              const ObstacleConfig& cfg) {
  const auto above = points_above_plane(points, plane, cfg.h_min, cfg.h_max);
  if (above.empty()) return {};
  std::vector<Vec3> subset;
  subset.reserve(above.size());
  for (std::size_t i : above) subset.push_back(points[i]);
  std::size_t K = cfg.K;
  if (K == 0) {
    const auto group = spatial_groups(subset, cfg.link_distance);
    std::vector<std::size_t> sizes;
    for (std::size_t g : group) {
      if (g >= sizes.size()) sizes.resize(g + 1, 0);
      ++sizes[g];
    }
    std::vector<Vec3> kept;
    for (std::size_t i = 0; i < subset.size(); ++i) {
      if (sizes[group[i]] >= cfg.min_group_size) kept.push_back(subset[i]);
    }
    if (kept.empty()) return {};
    K = std::min<std::size_t>(
        std::count_if(sizes.begin(), sizes.end(),
                      [&](std::size_t c) { return c >= cfg.min_group_size; }),
        kMaxClusters);
    subset = std::move(kept);
  }
  ClusterSet clusters;
  for (std::size_t r = 0; r < std::max<std::size_t>(cfg.restarts, 1); ++r) {
    ClusterSet trial = kmeans(subset, K, cfg.seed + r, cfg.max_iters);
    if (r == 0 || trial.objective_trace.back() < clusters.objective_trace.back()) {
      clusters = std::move(trial);
    }
  }

  std::vector<OrientedBox> boxes;
  boxes.reserve(clusters.clusters.size());
  std::vector<Vec3> members;
  for (const auto& cluster : clusters.clusters) {
    members.clear();
    for (std::size_t i : cluster) members.push_back(subset[i]);
    OrientedBox box = fit_box(members, plane);
    boxes.push_back(cfg.ground_boxes ? ground_box(box, plane) : box);
  }
  return boxes;
}

}  // namespace freespace

#endif  // FREESPACE_OBSTACLE_BOXES_HPP
