#ifndef FREESPACE_PLANE_FIT_HPP
#define FREESPACE_PLANE_FIT_HPP

// Road plane search over a discrete (theta, d) grid. Each cell is scored by
// the number of points whose algebraic residual
//   z sin(theta) - y cos(theta) - d cos(theta)
// is within inlier_tol; the best cell wins, ties going to the smallest theta
// and then the smallest d.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "freespace/errors.hpp"
#include "freespace/geom3d.hpp"

namespace freespace {

struct PlaneSearchConfig {
  double theta_min = -0.15;
  double theta_max = 0.15;
  double theta_step = 0.005;
  double d_init = 1.5;
  double d_window = 0.5;
  double d_step = 0.02;
  double inlier_tol = 0.05;
  std::size_t min_inliers = 100;

  bool valid() const {
    return theta_step > 0.0 && d_step > 0.0 && inlier_tol > 0.0 &&
           theta_min < theta_max && d_window >= 0.0;
  }
};

struct PlaneFitResult {
  double theta = 0.0;
  double dist = 0.0;
  std::size_t inlier_count = 0;
  std::vector<std::size_t> inlier_indices;
};

namespace detail {

inline std::size_t grid_count(double span, double step) {
  return static_cast<std::size_t>(std::floor(span / step + 1e-9)) + 1;
}

// Evaluated in one fixed order so grid search, refinement and inlier
// collection agree bit for bit.
inline double plane_residual(const Vec3& p, double sin_t, double cos_t,
                             double d) {
  return (p.z() * sin_t - p.y() * cos_t) - d * cos_t;
}

inline std::vector<std::size_t> collect_inliers(std::span<const Vec3> points,
                                                double theta, double d,
                                                double tol) {
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (std::abs(plane_residual(points[i], s, c, d)) <= tol) out.push_back(i);
  }
  return out;
}

inline double residual_sum(std::span<const Vec3> points,
                           std::span<const std::size_t> indices, double theta,
                           double d) {
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  double sum = 0.0;
  for (std::size_t i : indices) {
    const double r = plane_residual(points[i], s, c, d);
    sum += r * r;
  }
  return sum;
}

}  // namespace detail

inline PlaneFitResult fit_plane_hough(std::span<const Vec3> points,
                                      const PlaneSearchConfig& cfg) {
  if (!cfg.valid()) throw DomainError("invalid plane search configuration");
  if (points.empty()) throw DomainError("plane fit needs at least one point");
  for (const Vec3& p : points) {
    if (!p.allFinite()) throw DomainError("plane fit input has non-finite point");
  }

  const std::size_t n_theta =
      detail::grid_count(cfg.theta_max - cfg.theta_min, cfg.theta_step);
  const std::size_t n_d = detail::grid_count(2.0 * cfg.d_window, cfg.d_step);
  const double d_lo = cfg.d_init - cfg.d_window;

  std::vector<double> projected(points.size());
  std::size_t best_count = 0;
  double best_theta = 0.0;
  double best_d = 0.0;
  bool found = false;

  for (std::size_t it = 0; it < n_theta; ++it) {
    const double theta = cfg.theta_min + static_cast<double>(it) * cfg.theta_step;
    if (!(std::abs(theta) < M_PI / 2)) continue;
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    for (std::size_t i = 0; i < points.size(); ++i) {
      projected[i] = points[i].z() * s - points[i].y() * c;
    }
    for (std::size_t id = 0; id < n_d; ++id) {
      const double d = d_lo + static_cast<double>(id) * cfg.d_step;
      if (!(d > 0.0)) continue;
      const double dc = d * c;
      std::size_t count = 0;
      for (double a : projected) count += std::abs(a - dc) <= cfg.inlier_tol;
      if (!found || count > best_count) {
        found = true;
        best_count = count;
        best_theta = theta;
        best_d = d;
      }
    }
  }

  if (!found || best_count < cfg.min_inliers) {
    std::ostringstream msg;
    msg << "best plane cell has " << best_count << " inliers, need "
        << cfg.min_inliers;
    throw NoPlaneFound(msg.str());
  }

  PlaneFitResult result;
  result.theta = best_theta;
  result.dist = best_d;
  result.inlier_indices =
      detail::collect_inliers(points, best_theta, best_d, cfg.inlier_tol);
  result.inlier_count = result.inlier_indices.size();
  return result;
}

/// Least-squares polish of a grid result. The algebraic residual ignores x,
/// so the optimum is the total-least-squares line through the inliers' (y, z)
/// coordinates. Degenerate inlier sets, and any refinement that would not
/// lower the residual sum or keep min_inliers, return the input unchanged.
inline PlaneFitResult refine_plane_ls(std::span<const Vec3> points,
                                      const PlaneFitResult& result,
                                      const PlaneSearchConfig& cfg) {
  const auto& idx = result.inlier_indices;
  if (idx.empty()) throw DomainError("refinement needs a non-empty inlier set");
  if (idx.size() < 3) return result;

  Vec3 mean = Vec3::Zero();
  for (std::size_t i : idx) mean += points[i];
  mean /= static_cast<double>(idx.size());
  Mat3 cov = Mat3::Zero();
  for (std::size_t i : idx) {
    const Vec3 q = points[i] - mean;
    cov += q * q.transpose();
  }
  cov /= static_cast<double>(idx.size());

  Eigen::SelfAdjointEigenSolver<Mat3> eig3(cov);
  const Vec3 ev3 = eig3.eigenvalues();  // ascending
  if (ev3[1] <= 1e-12 * std::max(ev3[2], 1.0)) return result;  // collinear

  Eigen::Matrix2d cov_yz;
  cov_yz << cov(1, 1), cov(1, 2), cov(2, 1), cov(2, 2);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig2(cov_yz);
  if (eig2.eigenvalues()[1] <= 1e-15) return result;
  Eigen::Vector2d normal = eig2.eigenvectors().col(0);  // (-cos, sin)
  if (normal[0] > 0.0) normal = -normal;
  const double theta = std::atan2(normal[1], -normal[0]);
  if (!(std::abs(theta) < M_PI / 2)) return result;
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double d = (mean.z() * s - mean.y() * c) / c;
  if (!(d > 0.0) || !std::isfinite(d)) return result;

  const double before =
      detail::residual_sum(points, idx, result.theta, result.dist);
  const double after = detail::residual_sum(points, idx, theta, d);
  if (!(after <= before)) return result;

  PlaneFitResult refined;
  refined.theta = theta;
  refined.dist = d;
  refined.inlier_indices = detail::collect_inliers(points, theta, d, cfg.inlier_tol);
  refined.inlier_count = refined.inlier_indices.size();
  if (refined.inlier_count < cfg.min_inliers) return result;
  return refined;
}

}  // namespace freespace

#endif  // FREESPACE_PLANE_FIT_HPP
