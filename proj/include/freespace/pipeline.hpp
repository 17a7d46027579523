#ifndef FREESPACE_PIPELINE_HPP
#define FREESPACE_PIPELINE_HPP

// Frame-by-frame free-space pipeline. Each stage is exposed on its own so
// the command-line tool can run them separately on intermediate files and
// reproduce the combined run exactly.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "freespace/color_lines.hpp"
#include "freespace/crf_solver.hpp"
#include "freespace/errors.hpp"
#include "freespace/eval.hpp"
#include "freespace/freespace3d.hpp"
#include "freespace/geom3d.hpp"
#include "freespace/obstacle_boxes.hpp"
#include "freespace/plane_fit.hpp"
#include "freespace/prior_maps.hpp"
#include "freespace/raster.hpp"
#include "json.hpp"

namespace freespace {

struct PipelineConfig {
  CrfWeights weights;
  PlaneSearchConfig plane_search;
  bool refine_plane = true;
  ObstacleConfig obstacles;
  ColorLinesConfig color_lines;
  BackprojectConfig backproject;
  double bootstrap_threshold = 0.5;
  std::size_t plane_refit_interval = 1;

  bool valid() const {
    return weights.valid() && plane_search.valid() && obstacles.h_min >= 0.0 &&
           obstacles.h_max > obstacles.h_min && obstacles.link_distance > 0.0 &&
           color_lines.bin_width > 0.0 &&
           color_lines.variance_floor > 0.0 && backproject.stride >= 1 &&
           backproject.t_max > 0.0 && bootstrap_threshold > 0.0 &&
           bootstrap_threshold < 1.0 && plane_refit_interval >= 1;
  }
};

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  if (j.contains("weights")) {
    const auto& w = j["weights"];
    c.weights.w1 = w.value("w1", c.weights.w1);
    c.weights.w2 = w.value("w2", c.weights.w2);
    c.weights.w3 = w.value("w3", c.weights.w3);
  }
  if (j.contains("plane_search")) {
    const auto& p = j["plane_search"];
    auto& s = c.plane_search;
    s.theta_min = p.value("theta_min", s.theta_min);
    s.theta_max = p.value("theta_max", s.theta_max);
    s.theta_step = p.value("theta_step", s.theta_step);
    s.d_init = p.value("d_init", s.d_init);
    s.d_window = p.value("d_window", s.d_window);
    s.d_step = p.value("d_step", s.d_step);
    s.inlier_tol = p.value("inlier_tol", s.inlier_tol);
    s.min_inliers = p.value("min_inliers", s.min_inliers);
  }
  c.refine_plane = j.value("refine_plane", c.refine_plane);
  if (j.contains("kmeans")) {
    const auto& k = j["kmeans"];
    c.obstacles.K = k.value("K", c.obstacles.K);
    c.obstacles.seed = k.value("seed", c.obstacles.seed);
    c.obstacles.max_iters = k.value("max_iters", c.obstacles.max_iters);
    c.obstacles.restarts = k.value("restarts", c.obstacles.restarts);
    c.obstacles.link_distance = k.value("link_distance", c.obstacles.link_distance);
    c.obstacles.min_group_size = k.value("min_group_size", c.obstacles.min_group_size);
  }
  c.obstacles.ground_boxes = j.value("ground_boxes", c.obstacles.ground_boxes);
  if (j.contains("height_band")) {
    c.obstacles.h_min = j["height_band"].value("h_min", c.obstacles.h_min);
    c.obstacles.h_max = j["height_band"].value("h_max", c.obstacles.h_max);
  }
  if (j.contains("color_lines")) {
    const auto& cl = j["color_lines"];
    c.color_lines.bin_width = cl.value("bin_width", c.color_lines.bin_width);
    c.color_lines.variance_floor = cl.value("variance_floor", c.color_lines.variance_floor);
    c.color_lines.min_bootstrap_pixels =
        cl.value("min_bootstrap_pixels", c.color_lines.min_bootstrap_pixels);
  }
  if (j.contains("backproject")) {
    c.backproject.stride = j["backproject"].value("stride", c.backproject.stride);
    c.backproject.t_max = j["backproject"].value("t_max", c.backproject.t_max);
  }
  c.bootstrap_threshold = j.value("bootstrap_threshold", c.bootstrap_threshold);
  c.plane_refit_interval = j.value("plane_refit_interval", c.plane_refit_interval);
  if (!c.valid()) throw DomainError("pipeline configuration out of range");
  return c;
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  const auto& s = c.plane_search;
  return {{"weights", {{"w1", c.weights.w1}, {"w2", c.weights.w2}, {"w3", c.weights.w3}}},
          {"plane_search",
           {{"theta_min", s.theta_min}, {"theta_max", s.theta_max},
            {"theta_step", s.theta_step}, {"d_init", s.d_init},
            {"d_window", s.d_window}, {"d_step", s.d_step},
            {"inlier_tol", s.inlier_tol}, {"min_inliers", s.min_inliers}}},
          {"refine_plane", c.refine_plane},
          {"kmeans", {{"K", c.obstacles.K}, {"seed", c.obstacles.seed},
                      {"max_iters", c.obstacles.max_iters},
                      {"restarts", c.obstacles.restarts},
                      {"link_distance", c.obstacles.link_distance},
                      {"min_group_size", c.obstacles.min_group_size}}},
          {"ground_boxes", c.obstacles.ground_boxes},
          {"height_band", {{"h_min", c.obstacles.h_min}, {"h_max", c.obstacles.h_max}}},
          {"color_lines", {{"bin_width", c.color_lines.bin_width},
                           {"variance_floor", c.color_lines.variance_floor},
                           {"min_bootstrap_pixels", c.color_lines.min_bootstrap_pixels}}},
          {"backproject", {{"stride", c.backproject.stride}, {"t_max", c.backproject.t_max}}},
          {"bootstrap_threshold", c.bootstrap_threshold},
          {"plane_refit_interval", c.plane_refit_interval}};
}

/// Two-channel map from per-class softmax rasters: the road class and the
/// best competing class.
inline ProbMap ingest_softmax(std::span<const Raster<float>> class_maps,
                              std::size_t road_class_index) {
  if (class_maps.size() < 2) throw DomainError("need at least two classes");
  if (road_class_index >= class_maps.size()) {
    throw DomainError("road class index out of range");
  }
  const auto& first = class_maps.front();
  for (const auto& m : class_maps) require_same_shape(first, m, "class maps");
  ProbMap probs(first.width, first.height);
  for (std::size_t i = 0; i < first.size(); ++i) {
    float best = 0.0f;
    for (std::size_t c = 0; c < class_maps.size(); ++c) {
      const float v = class_maps[c].data[i];
      if (!(v >= 0.0f && v <= 1.0f)) throw DomainError("class probability outside [0, 1]");
      if (c != road_class_index) best = std::max(best, v);
    }
    probs.s_road[i] = class_maps[road_class_index].data[i];
    probs.s_nonroad_max[i] = best;
  }
  return probs;
}

// --- stages ---------------------------------------------------------------

/// Plane from a cloud in the frame's camera coordinates.
inline RoadPlane stage_fit_plane(std::span<const Vec3> camera_cloud, const PoseSE3& pose,
                                 const PipelineConfig& cfg) {
  PlaneFitResult fit = fit_plane_hough(camera_cloud, cfg.plane_search);
  if (cfg.refine_plane) fit = refine_plane_ls(camera_cloud, fit, cfg.plane_search);
  return plane_from_theta_d(fit.theta, fit.dist, pose);
}

inline std::vector<OrientedBox> stage_fit_boxes(std::span<const Vec3> camera_cloud,
                                                const PoseSE3& pose, const RoadPlane& plane,
                                                const PipelineConfig& cfg) {
  std::vector<Vec3> world;
  world.reserve(camera_cloud.size());
  for (const Vec3& p : camera_cloud) world.push_back(pose.apply(p));
  return fit_obstacles(world, plane, cfg.obstacles);
}

struct Priors {
  RoadPlane plane;
  std::vector<OrientedBox> boxes;
};

struct SegmentResult {
  SolveResult solution;
  UnaryField d1;
  UnaryField d2;
  UnaryField d3;
  bool color_model_ok = true;
};

inline Raster<std::uint8_t> bootstrap_mask(const ProbMap& probs, double threshold) {
  Raster<std::uint8_t> m(probs.width, probs.height, 0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    m.data[i] = static_cast<double>(probs.s_road[i]) >= threshold ? 1 : 0;
  }
  return m;
}

/// Builds the full cost field for one frame and solves it. `previous` holds
/// the prior frame's priors already expressed in the current world frame;
/// without it the temporal term is zero. When the bootstrap mask is too
/// small for a color model the smoothness term is zero.
inline SegmentResult stage_segment(const CameraModel& cam, const PoseSE3& pose,
                                   const RgbImage& image, const ProbMap& probs,
                                   const Priors& current, const std::optional<Priors>& previous,
                                   const PipelineConfig& cfg) {
  if (image.width != cam.width || image.height != cam.height ||
      probs.width != cam.width || probs.height != cam.height) {
    throw DimensionMismatch("image, probability map and camera disagree in size");
  }
  SegmentResult out;
  out.d1 = unary_from_indicator(indicator_map(cam, pose, current.plane, current.boxes),
                                cfg.weights.w1, cfg.weights.w2);
  if (previous) {
    const auto [plane, boxes] =
        transfer_priors(previous->plane, previous->boxes, PoseSE3::identity());
    out.d2 = unary_from_indicator(indicator_map(cam, pose, plane, boxes), cfg.weights.w1,
                                  cfg.weights.w2);
  } else {
    out.d2 = UnaryField(cam.width, cam.height);
  }
  out.d3 = unary_from_probmap(probs, cfg.weights.w3);

  CostField costs;
  const UnaryField parts[] = {out.d1, out.d2, out.d3};
  costs.unary = accumulate_unaries(parts);
  try {
    const ColorLinesModel model =
        build_model(image, bootstrap_mask(probs, cfg.bootstrap_threshold), cfg.color_lines);
    costs.pairwise = edge_capacities(road_scores(image, model));
  } catch (const ModelUnderdetermined&) {
    out.color_model_ok = false;
    costs.pairwise = EdgeField(cam.width, cam.height, 0.0);
  }
  out.solution = solve(costs);
  return out;
}

// --- whole sequence -------------------------------------------------------

struct FrameInput {
  std::string id;
  RgbImage image;
  ProbMap prob_map;
  std::vector<Vec3> cloud;  // camera frame
  PoseSE3 pose;
  std::optional<LabelMask> gt_mask;
};

struct FrameOutput {
  std::string id;
  LabelMask mask;
  FreeSpaceCloud free_space;
  RoadPlane plane;
  std::vector<OrientedBox> boxes;
  double energy = 0.0;
  double flow = 0.0;
  std::optional<ConfusionCounts> counts;
  std::optional<Metrics> metrics;
  std::vector<std::string> warnings;
  // Data terms, kept only when requested.
  std::optional<UnaryField> d1;
  std::optional<UnaryField> d2;
};

struct PipelineResult {
  std::vector<FrameOutput> frames;
  std::optional<ConfusionCounts> total_counts;
  std::optional<Metrics> aggregate;
};

inline PipelineResult run_pipeline(std::span<const FrameInput> frames, const CameraModel& cam,
                                   const PipelineConfig& cfg, bool keep_fields = false) {
  if (!cfg.valid()) throw DomainError("pipeline configuration out of range");
  require_valid(cam);
  PipelineResult result;
  std::optional<Priors> previous;
  std::optional<RoadPlane> last_plane;

  for (std::size_t f = 0; f < frames.size(); ++f) {
    const FrameInput& in = frames[f];
    require_valid(in.pose);
    FrameOutput out;
    out.id = in.id;

    RoadPlane plane;
    const bool refit = !last_plane || f % cfg.plane_refit_interval == 0;
    if (refit) {
      try {
        plane = stage_fit_plane(in.cloud, in.pose, cfg);
      } catch (const NoPlaneFound& e) {
        if (!last_plane) throw;
        plane = *last_plane;
        out.warnings.push_back(std::string("plane fit failed, reusing previous plane: ") +
                               e.what());
      }
    } else {
      plane = *last_plane;
    }
    last_plane = plane;

    Priors current{plane, stage_fit_boxes(in.cloud, in.pose, plane, cfg)};
    SegmentResult seg =
        stage_segment(cam, in.pose, in.image, in.prob_map, current, previous, cfg);
    if (!seg.color_model_ok) {
      out.warnings.push_back("too few bootstrap pixels for a color model; no smoothness term");
    }

    out.mask = std::move(seg.solution.mask);
    out.energy = seg.solution.min_energy;
    out.flow = seg.solution.flow;
    out.free_space = backproject_mask(out.mask, cam, in.pose, plane, cfg.backproject, in.id);
    out.plane = plane;
    out.boxes = current.boxes;
    if (keep_fields) {
      out.d1 = std::move(seg.d1);
      out.d2 = std::move(seg.d2);
    }
    if (in.gt_mask) {
      out.counts = compare_masks(out.mask, *in.gt_mask);
      out.metrics = metrics(*out.counts);
      if (!result.total_counts) result.total_counts = ConfusionCounts{};
      *result.total_counts += *out.counts;
    }
    previous = std::move(current);
    result.frames.push_back(std::move(out));
  }
  if (result.total_counts) result.aggregate = metrics(*result.total_counts);
  return result;
}

}  // namespace freespace

#endif  // FREESPACE_PIPELINE_HPP
