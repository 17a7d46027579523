#ifndef FREESPACE_DATASET_HPP
#define FREESPACE_DATASET_HPP

// On-disk layout of a frame sequence:
//
//   <dir>/camera.json
//   <dir>/frame_0000/image.ppm    RGB image
//   <dir>/frame_0000/prob.pfm2    two-channel road probabilities
//   <dir>/frame_0000/cloud.ply    structure, camera frame of this frame
//   <dir>/frame_0000/pose.json    world-from-camera pose
//   <dir>/frame_0000/gt_mask.pgm  optional ground truth
//
// Pipeline results go to <out>/frame_XXXX/{mask.pgm, freespace.ply,
// plane.json, boxes.json, overlay.ppm} and <out>/metrics.json.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "freespace/io.hpp"
#include "freespace/json_io.hpp"
#include "freespace/pipeline.hpp"
#include "freespace/scenegen.hpp"

namespace freespace::io {

inline const Rgb kOverlayTint{255, 0, 255};

inline std::string frame_dir_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04zu", index);
  return buf;
}

/// Writes a generated scene in the frame layout plus truth.json holding the
/// true plane and boxes.
inline void write_scene(const fs::path& dir, const Scene& scene) {
  fs::create_directories(dir);
  write_json(dir / "camera.json", camera_to_json(scene.camera));
  write_json(dir / "truth.json",
             {{"plane", plane_to_json(scene.plane)}, {"boxes", boxes_to_json(scene.boxes)}});
  for (std::size_t f = 0; f < scene.frames.size(); ++f) {
    const FrameBundle& b = scene.frames[f];
    const fs::path fd = dir / frame_dir_name(f);
    fs::create_directories(fd);
    write_ppm(fd / "image.ppm", b.image);
    write_pfm2(fd / "prob.pfm2", b.prob_map);
    write_ply(fd / "cloud.ply", b.cloud);
    write_json(fd / "pose.json", pose_to_json(b.pose));
    write_mask(fd / "gt_mask.pgm", b.gt_mask);
  }
}

/// Loads every frame_* directory in name order. When `gt_name` is not empty
/// that file is read from each frame directory as ground truth.
inline std::vector<FrameInput> read_frames(const fs::path& dir, const std::string& gt_name) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("frame_", 0) == 0) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw IoError("no frame_* directories in " + dir.string());
  std::vector<FrameInput> frames;
  for (const fs::path& fd : dirs) {
    FrameInput in;
    in.id = fd.filename().string();
    in.image = read_ppm(fd / "image.ppm");
    in.prob_map = read_pfm2(fd / "prob.pfm2");
    in.cloud = read_ply(fd / "cloud.ply");
    in.pose = pose_from_json(read_json(fd / "pose.json"));
    if (!gt_name.empty()) in.gt_mask = read_mask(fd / gt_name);
    frames.push_back(std::move(in));
  }
  return frames;
}

inline nlohmann::json pipeline_metrics_json(const PipelineResult& result) {
  nlohmann::json per_frame = nlohmann::json::array();
  for (const FrameOutput& f : result.frames) {
    if (!f.metrics) continue;
    nlohmann::json m = metrics_to_json(*f.metrics);
    m["frame"] = f.id;
    m["tp"] = f.counts->tp;
    m["fp"] = f.counts->fp;
    m["fn"] = f.counts->fn;
    m["tn"] = f.counts->tn;
    per_frame.push_back(m);
  }
  return {{"frames", per_frame},
          {"aggregate", result.aggregate ? metrics_to_json(*result.aggregate)
                                         : nlohmann::json(nullptr)}};
}

inline void write_pipeline_outputs(const fs::path& out, std::span<const FrameInput> inputs,
                                   const PipelineResult& result) {
  fs::create_directories(out);
  for (std::size_t f = 0; f < result.frames.size(); ++f) {
    const FrameOutput& r = result.frames[f];
    const fs::path fd = out / r.id;
    fs::create_directories(fd);
    write_mask(fd / "mask.pgm", r.mask);
    write_ply(fd / "freespace.ply", r.free_space.points);
    write_json(fd / "plane.json", plane_to_json(r.plane));
    write_json(fd / "boxes.json", boxes_to_json(r.boxes));
    write_ppm(fd / "overlay.ppm", export_overlay(inputs[f].image, r.mask, kOverlayTint));
  }
  if (result.aggregate) write_json(out / "metrics.json", pipeline_metrics_json(result));
}

}  // namespace freespace::io

#endif  // FREESPACE_DATASET_HPP
