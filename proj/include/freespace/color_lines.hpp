#ifndef FREESPACE_COLOR_LINES_HPP
#define FREESPACE_COLOR_LINES_HPP

// Illumination-invariant road color model. RGB space is cut into shells
// between concentric spheres of radius k * bin_width around black; each
// shell holds the mean and isotropic variance of the road pixels falling in
// it. Shells without samples borrow a mean from a line fitted through the
// occupied shell means, since a surface under changing illumination traces
// such a line.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <vector>

#include "freespace/errors.hpp"
#include "freespace/geom3d.hpp"
#include "freespace/raster.hpp"

namespace freespace {

struct ColorLinesConfig {
  double bin_width = 16.0;
  double variance_floor = 25.0;
  std::size_t min_bootstrap_pixels = 500;
};

struct ColorBin {
  bool occupied = false;
  Vec3 mean = Vec3::Zero();
  double variance = 0.0;
  std::size_t count = 0;
};

struct ColorLine {
  Vec3 anchor = Vec3::Zero();
  Vec3 direction = Vec3::Ones().normalized();

  Vec3 at(double s) const { return anchor + s * direction; }
};

struct ColorLinesModel {
  double bin_width = 16.0;
  std::vector<ColorBin> bins;
  ColorLine line;
};

/// Per-pixel road / non-road scores; p_nonroad is defined as 1 - p_road.
struct RoadScoreMap {
  int width = 0;
  int height = 0;
  std::vector<double> p_road;
  std::vector<double> p_nonroad;
};

/// Horizontal edges are stored at (x, y) for the pair (x, y)-(x+1, y), width-1
/// per row; vertical edges at (x, y) for (x, y)-(x, y+1), height-1 rows.
struct EdgeField {
  int width = 0;
  int height = 0;
  std::vector<double> horizontal;
  std::vector<double> vertical;

  EdgeField() = default;
  EdgeField(int w, int h, double fill = 0.0)
      : width(w),
        height(h),
        horizontal(static_cast<std::size_t>(std::max(w - 1, 0)) * h, fill),
        vertical(static_cast<std::size_t>(w) * std::max(h - 1, 0), fill) {}

  double& right(int x, int y) {
    return horizontal[static_cast<std::size_t>(y) * (width - 1) + x];
  }
  double right(int x, int y) const {
    return horizontal[static_cast<std::size_t>(y) * (width - 1) + x];
  }
  double& down(int x, int y) {
    return vertical[static_cast<std::size_t>(y) * width + x];
  }
  double down(int x, int y) const {
    return vertical[static_cast<std::size_t>(y) * width + x];
  }
};

inline Vec3 to_vec(const Rgb& c) { return Vec3(c.r, c.g, c.b); }

inline std::size_t bin_index(const Vec3& rgb, double bin_width) {
  if (!(bin_width > 0.0)) throw DomainError("bin width must be positive");
  return static_cast<std::size_t>(std::floor(rgb.norm() / bin_width));
}

inline std::size_t bin_count(double bin_width) {
  return static_cast<std::size_t>(std::ceil(255.0 * std::sqrt(3.0) / bin_width));
}

namespace detail {

// Point on the line at distance `radius` from the origin, taking the far
// root. Lines that never reach the radius fall back to the ray through the
// origin along the line direction.
inline Vec3 line_point_at_radius(const ColorLine& line, double radius) {
  const double b = line.anchor.dot(line.direction);
  const double disc = b * b - (line.anchor.squaredNorm() - radius * radius);
  if (disc < 0.0) return radius * line.direction;
  return line.at(-b + std::sqrt(disc));
}

}  // namespace detail

inline ColorLinesModel build_model(const RgbImage& image,
                                   const Raster<std::uint8_t>& bootstrap_mask,
                                   const ColorLinesConfig& cfg) {
  require_same_shape(image, bootstrap_mask, "color model bootstrap");
  if (!(cfg.bin_width > 0.0) || !(cfg.variance_floor > 0.0)) {
    throw DomainError("invalid color lines configuration");
  }
  ColorLinesModel model;
  model.bin_width = cfg.bin_width;
  const std::size_t nbins = bin_count(cfg.bin_width);
  model.bins.assign(nbins, ColorBin{});

  std::vector<Vec3> sums(nbins, Vec3::Zero());
  std::vector<double> sq_sums(nbins, 0.0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (!bootstrap_mask.data[i]) continue;
    const Vec3 c = to_vec(image.data[i]);
    const std::size_t k = std::min(bin_index(c, cfg.bin_width), nbins - 1);
    sums[k] += c;
    sq_sums[k] += c.squaredNorm();
    ++model.bins[k].count;
    ++total;
  }
  if (total < cfg.min_bootstrap_pixels) {
    std::ostringstream msg;
    msg << "bootstrap mask has " << total << " road pixels, need "
        << cfg.min_bootstrap_pixels;
    throw ModelUnderdetermined(msg.str());
  }

  double variance_sum = 0.0;
  std::size_t occupied = 0;
  for (std::size_t k = 0; k < nbins; ++k) {
    ColorBin& bin = model.bins[k];
    if (bin.count == 0) continue;
    const double n = static_cast<double>(bin.count);
    bin.occupied = true;
    bin.mean = sums[k] / n;
    // E|x - mean|^2 = E|x|^2 - |mean|^2
    const double var = sq_sums[k] / n - bin.mean.squaredNorm();
    bin.variance = std::max(var, cfg.variance_floor);
    variance_sum += bin.variance;
    ++occupied;
  }

  if (occupied == 1) {
    const auto it = std::find_if(model.bins.begin(), model.bins.end(),
                                 [](const ColorBin& b) { return b.occupied; });
    model.line.anchor = Vec3::Zero();
    if (it->mean.norm() > 0.0) model.line.direction = it->mean.normalized();
  } else {
    // Count-weighted total least squares through the occupied bin means.
    double weight = 0.0;
    Vec3 centroid = Vec3::Zero();
    for (const ColorBin& b : model.bins) {
      if (!b.occupied) continue;
      centroid += static_cast<double>(b.count) * b.mean;
      weight += static_cast<double>(b.count);
    }
    centroid /= weight;
    Mat3 scatter = Mat3::Zero();
    for (const ColorBin& b : model.bins) {
      if (!b.occupied) continue;
      const Vec3 q = b.mean - centroid;
      scatter += static_cast<double>(b.count) * q * q.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
    Vec3 dir = eig.eigenvectors().col(2);
    if (dir.sum() < 0.0) dir = -dir;  // point toward brighter colors
    model.line.anchor = centroid;
    model.line.direction = dir.normalized();
  }

  const double mean_variance = variance_sum / static_cast<double>(occupied);
  for (std::size_t k = 0; k < nbins; ++k) {
    ColorBin& bin = model.bins[k];
    if (bin.occupied) continue;
    const double radius = (static_cast<double>(k) + 0.5) * cfg.bin_width;
    bin.mean = detail::line_point_at_radius(model.line, radius);
    bin.variance = mean_variance;
  }
  return model;
}

inline double road_probability(const Vec3& rgb, const ColorLinesModel& model) {
  const std::size_t k =
      std::min(bin_index(rgb, model.bin_width), model.bins.size() - 1);
  const ColorBin& bin = model.bins[k];
  return std::exp(-(rgb - bin.mean).squaredNorm() / (2.0 * bin.variance));
}

inline RoadScoreMap road_scores(const RgbImage& image,
                                const ColorLinesModel& model) {
  if (model.bins.empty()) throw InvariantViolation("color model has no bins");
  RoadScoreMap scores;
  scores.width = image.width;
  scores.height = image.height;
  scores.p_road.resize(image.size());
  scores.p_nonroad.resize(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double p = road_probability(to_vec(image.data[i]), model);
    scores.p_road[i] = p;
    scores.p_nonroad[i] = 1.0 - p;
  }
  return scores;
}

inline double edge_capacity(double p_road_a, double p_nonroad_a,
                            double p_road_b, double p_nonroad_b) {
  return p_road_a * p_road_b + p_nonroad_a * p_nonroad_b;
}

inline EdgeField edge_capacities(const RoadScoreMap& scores) {
  EdgeField edges(scores.width, scores.height);
  const auto at = [&](int x, int y) {
    return static_cast<std::size_t>(y) * scores.width + x;
  };
  for (int y = 0; y < scores.height; ++y) {
    for (int x = 0; x < scores.width; ++x) {
      const std::size_t p = at(x, y);
      if (x + 1 < scores.width) {
        const std::size_t q = at(x + 1, y);
        edges.right(x, y) = edge_capacity(scores.p_road[p], scores.p_nonroad[p],
                                          scores.p_road[q], scores.p_nonroad[q]);
      }
      if (y + 1 < scores.height) {
        const std::size_t q = at(x, y + 1);
        edges.down(x, y) = edge_capacity(scores.p_road[p], scores.p_nonroad[p],
                                         scores.p_road[q], scores.p_nonroad[q]);
      }
    }
  }
  return edges;
}

}  // namespace freespace

#endif  // FREESPACE_COLOR_LINES_HPP
