#ifndef FREESPACE_JSON_IO_HPP
#define FREESPACE_JSON_IO_HPP

// JSON encodings of cameras, poses, planes, boxes, scene specs and metrics.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "freespace/errors.hpp"
#include "freespace/eval.hpp"
#include "freespace/geom3d.hpp"
#include "freespace/scenegen.hpp"

namespace freespace::io {

using nlohmann::json;

inline json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw IoError("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json camera_to_json(const CameraModel& c) {
  return {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx},
          {"cy", c.cy}, {"width", c.width}, {"height", c.height}};
}

inline CameraModel camera_from_json(const json& j) {
  CameraModel c;
  c.fx = j.at("fx").get<double>();
  c.fy = j.at("fy").get<double>();
  c.cx = j.at("cx").get<double>();
  c.cy = j.at("cy").get<double>();
  c.width = j.at("width").get<int>();
  c.height = j.at("height").get<int>();
  if (!c.valid()) throw IoError("camera parameters out of range");
  return c;
}

inline json pose_to_json(const PoseSE3& p) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(p.rotation(r, c));
  }
  return {{"rotation", rot}, {"translation", vec_to_json(p.translation)}};
}

inline PoseSE3 pose_from_json(const json& j) {
  const json& rot = j.at("rotation");
  if (!rot.is_array() || rot.size() != 9) throw IoError("rotation must have 9 entries");
  PoseSE3 p;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) p.rotation(r, c) = rot[3 * r + c].get<double>();
  }
  p.translation = vec_from_json(j.at("translation"));
  if (!p.valid()) throw IoError("pose rotation is not orthonormal");
  return p;
}

inline json plane_to_json(const RoadPlane& p) {
  return {{"theta", p.theta},
          {"dist", p.dist},
          {"keyframe_pose", pose_to_json(p.keyframe_pose)},
          {"normal", vec_to_json(p.normal)},
          {"offset", p.offset}};
}

inline RoadPlane plane_from_json(const json& j) {
  RoadPlane p;
  p.theta = j.at("theta").get<double>();
  p.dist = j.at("dist").get<double>();
  p.keyframe_pose = pose_from_json(j.at("keyframe_pose"));
  p.normal = vec_from_json(j.at("normal"));
  p.offset = j.at("offset").get<double>();
  return p;
}

inline json box_to_json(const OrientedBox& b) {
  return {{"center", vec_to_json(b.center)},
          {"axes", json::array({vec_to_json(b.axes[0]), vec_to_json(b.axes[1]),
                                vec_to_json(b.axes[2])})},
          {"half_extents", vec_to_json(b.half_extents)}};
}

inline OrientedBox box_from_json(const json& j) {
  OrientedBox b;
  b.center = vec_from_json(j.at("center"));
  const json& axes = j.at("axes");
  if (!axes.is_array() || axes.size() != 3) throw IoError("box needs three axes");
  for (int k = 0; k < 3; ++k) b.axes[k] = vec_from_json(axes[k]);
  b.half_extents = vec_from_json(j.at("half_extents"));
  if (!b.valid()) throw IoError("box axes are not orthonormal or extents not positive");
  return b;
}

inline json boxes_to_json(std::span<const OrientedBox> boxes) {
  json arr = json::array();
  for (const auto& b : boxes) arr.push_back(box_to_json(b));
  return arr;
}

inline std::vector<OrientedBox> boxes_from_json(const json& j) {
  if (!j.is_array()) throw IoError("boxes file must hold a JSON list");
  std::vector<OrientedBox> out;
  for (const auto& b : j) out.push_back(box_from_json(b));
  return out;
}

/// Mirrors SceneSpec. The plane is {"theta", "d"}; unspecified fields keep
/// their defaults.
inline SceneSpec scene_spec_from_json(const json& j) {
  SceneSpec s;
  if (j.contains("plane")) {
    s.plane_theta = j["plane"].value("theta", s.plane_theta);
    s.plane_d = j["plane"].value("d", s.plane_d);
  }
  if (j.contains("camera")) s.camera = camera_from_json(j["camera"]);
  if (j.contains("boxes")) s.boxes = boxes_from_json(j["boxes"]);
  if (j.contains("trajectory")) {
    s.trajectory.clear();
    for (const auto& p : j["trajectory"]) s.trajectory.push_back(pose_from_json(p));
  }
  s.cloud_density = j.value("cloud_density", s.cloud_density);
  s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
  s.outlier_fraction = j.value("outlier_fraction", s.outlier_fraction);
  s.label_flip_rate = j.value("label_flip_rate", s.label_flip_rate);
  s.rng_seed = j.value("rng_seed", s.rng_seed);
  s.road_half_width = j.value("road_half_width", s.road_half_width);
  s.road_near = j.value("road_near", s.road_near);
  s.road_far = j.value("road_far", s.road_far);
  if (!s.valid()) throw IoError("scene specification out of range");
  return s;
}

inline json scene_spec_to_json(const SceneSpec& s) {
  json traj = json::array();
  for (const auto& p : s.trajectory) traj.push_back(pose_to_json(p));
  return {{"plane", {{"theta", s.plane_theta}, {"d", s.plane_d}}},
          {"camera", camera_to_json(s.camera)},
          {"boxes", boxes_to_json(s.boxes)},
          {"trajectory", traj},
          {"cloud_density", s.cloud_density},
          {"noise_sigma", s.noise_sigma},
          {"outlier_fraction", s.outlier_fraction},
          {"label_flip_rate", s.label_flip_rate},
          {"rng_seed", s.rng_seed},
          {"road_half_width", s.road_half_width},
          {"road_near", s.road_near},
          {"road_far", s.road_far}};
}

inline json metrics_to_json(const Metrics& m) {
  const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"precision", opt(m.precision)}, {"recall", opt(m.recall)}, {"fval", opt(m.fval)}};
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace freespace::io

#endif  // FREESPACE_JSON_IO_HPP
