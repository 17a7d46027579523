// Command-line front end: synthetic data generation, the individual pipeline
// stages on intermediate files, evaluation and the full sequence run.
//
// Exit codes: 0 success, 2 input error, 3 no road plane found,
// 4 internal invariant violation.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "freespace/dataset.hpp"

namespace fs = std::filesystem;
using namespace freespace;

namespace {

enum ExitCode { kOk = 0, kInputError = 2, kNoPlane = 3, kInternal = 4 };

PipelineConfig load_config(const std::string& path) {
  if (path.empty()) return PipelineConfig{};
  return config_from_json(io::read_json(path));
}

std::vector<Vec3> load_cloud(const std::string& path) { return io::read_ply(path); }
PoseSE3 load_pose(const std::string& path) { return io::pose_from_json(io::read_json(path)); }
RoadPlane load_plane(const std::string& path) { return io::plane_from_json(io::read_json(path)); }
std::vector<OrientedBox> load_boxes(const std::string& path) {
  return io::boxes_from_json(io::read_json(path));
}

struct Options {
  std::string config;
  std::string out;
  std::string gt;
  std::string scene;
  std::string frames;
  std::string camera;
  std::string cloud;
  std::string pose;
  std::string plane;
  std::string boxes;
  std::string prev_plane;
  std::string prev_boxes;
  std::string image;
  std::string prob;
  std::string mask;
  std::string frame_id = "frame";
};

int run_synth(const Options& o) {
  SceneSpec spec = default_acceptance_scene();
  if (!o.scene.empty()) {
    nlohmann::json j = io::scene_spec_to_json(spec);
    j.merge_patch(io::read_json(o.scene));
    spec = io::scene_spec_from_json(j);
  }
  io::write_scene(o.out, gen_scene(spec));
  return kOk;
}

int run_fit_plane(const Options& o) {
  const PipelineConfig cfg = load_config(o.config);
  const RoadPlane plane = stage_fit_plane(load_cloud(o.cloud), load_pose(o.pose), cfg);
  fs::create_directories(o.out);
  io::write_json(fs::path(o.out) / "plane.json", io::plane_to_json(plane));
  return kOk;
}

int run_fit_boxes(const Options& o) {
  const PipelineConfig cfg = load_config(o.config);
  const auto boxes =
      stage_fit_boxes(load_cloud(o.cloud), load_pose(o.pose), load_plane(o.plane), cfg);
  fs::create_directories(o.out);
  io::write_json(fs::path(o.out) / "boxes.json", io::boxes_to_json(boxes));
  return kOk;
}

int run_segment(const Options& o) {
  const PipelineConfig cfg = load_config(o.config);
  const CameraModel cam = io::camera_from_json(io::read_json(o.camera));
  const Priors current{load_plane(o.plane), load_boxes(o.boxes)};
  std::optional<Priors> previous;
  if (!o.prev_plane.empty()) {
    if (o.prev_boxes.empty()) throw DomainError("--prev-plane needs --prev-boxes");
    previous = Priors{load_plane(o.prev_plane), load_boxes(o.prev_boxes)};
  }
  const SegmentResult seg = stage_segment(cam, load_pose(o.pose), io::read_ppm(o.image),
                                          io::read_pfm2(o.prob), current, previous, cfg);
  if (!seg.color_model_ok) {
    std::cerr << "warning: too few bootstrap pixels for a color model; no smoothness term\n";
  }
  fs::create_directories(o.out);
  io::write_mask(fs::path(o.out) / "mask.pgm", seg.solution.mask);
  std::cout << "frame=" << o.frame_id << " energy=" << seg.solution.min_energy
            << " flow=" << seg.solution.flow << '\n';
  return kOk;
}

int run_backproject(const Options& o) {
  const PipelineConfig cfg = load_config(o.config);
  const CameraModel cam = io::camera_from_json(io::read_json(o.camera));
  const LabelMask mask = io::read_mask(o.mask);
  const FreeSpaceCloud cloud =
      backproject_mask(mask, cam, load_pose(o.pose), load_plane(o.plane), cfg.backproject,
                       o.frame_id);
  fs::create_directories(o.out);
  io::write_ply(fs::path(o.out) / "freespace.ply", cloud.points);
  if (!o.image.empty()) {
    io::write_ppm(fs::path(o.out) / "overlay.ppm",
                  export_overlay(io::read_ppm(o.image), mask, io::kOverlayTint));
  }
  return kOk;
}

int run_eval(const Options& o) {
  const ConfusionCounts c = compare_masks(io::read_mask(o.mask), io::read_mask(o.gt));
  nlohmann::json j = io::metrics_to_json(metrics(c));
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  j["tn"] = c.tn;
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    io::write_json(fs::path(o.out) / "metrics.json", j);
  }
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int run_full(const Options& o) {
  const PipelineConfig cfg = load_config(o.config);
  const CameraModel cam = io::camera_from_json(io::read_json(fs::path(o.frames) / "camera.json"));
  const auto inputs = io::read_frames(o.frames, o.gt);
  const PipelineResult result = run_pipeline(inputs, cam, cfg);
  for (const FrameOutput& f : result.frames) {
    std::cout << "frame=" << f.id << " energy=" << f.energy << " flow=" << f.flow << '\n';
    for (const auto& w : f.warnings) std::cerr << "warning: " << f.id << ": " << w << '\n';
  }
  io::write_pipeline_outputs(o.out, inputs, result);
  if (result.aggregate) std::cout << io::pipeline_metrics_json(result)["aggregate"].dump() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Road free-space detection from 3D priors and 2D segmentation"};
  app.require_subcommand(1);
  Options o;

  const auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "pipeline configuration JSON")->check(CLI::ExistingFile);
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic frame sequence");
  synth->add_option("--scene", o.scene, "scene JSON overriding the default scene");
  synth->add_option("--out", o.out, "output directory")->required();

  auto* fit_plane = app.add_subcommand("fit-plane", "fit the road plane to a point cloud");
  with_config(fit_plane);
  fit_plane->add_option("--cloud", o.cloud, "PLY cloud in camera frame")->required();
  fit_plane->add_option("--pose", o.pose, "pose JSON")->required();
  fit_plane->add_option("--out", o.out, "output directory (plane.json)")->required();

  auto* fit_boxes = app.add_subcommand("fit-boxes", "fit obstacle boxes above the plane");
  with_config(fit_boxes);
  fit_boxes->add_option("--cloud", o.cloud, "PLY cloud in camera frame")->required();
  fit_boxes->add_option("--pose", o.pose, "pose JSON")->required();
  fit_boxes->add_option("--plane", o.plane, "plane JSON")->required();
  fit_boxes->add_option("--out", o.out, "output directory (boxes.json)")->required();

  auto* segment = app.add_subcommand("segment", "solve the road CRF for one frame");
  with_config(segment);
  segment->add_option("--camera", o.camera, "camera JSON")->required();
  segment->add_option("--pose", o.pose, "pose JSON")->required();
  segment->add_option("--image", o.image, "PPM image")->required();
  segment->add_option("--prob", o.prob, "PFM2 probability map")->required();
  segment->add_option("--plane", o.plane, "plane JSON")->required();
  segment->add_option("--boxes", o.boxes, "boxes JSON")->required();
  segment->add_option("--prev-plane", o.prev_plane, "previous frame plane JSON");
  segment->add_option("--prev-boxes", o.prev_boxes, "previous frame boxes JSON");
  segment->add_option("--frame-id", o.frame_id, "id used in the log line");
  segment->add_option("--out", o.out, "output directory (mask.pgm)")->required();

  auto* backproject = app.add_subcommand("backproject", "lift road pixels onto the plane");
  with_config(backproject);
  backproject->add_option("--camera", o.camera, "camera JSON")->required();
  backproject->add_option("--pose", o.pose, "pose JSON")->required();
  backproject->add_option("--plane", o.plane, "plane JSON")->required();
  backproject->add_option("--mask", o.mask, "PGM road mask")->required();
  backproject->add_option("--image", o.image, "PPM image; also writes overlay.ppm");
  backproject->add_option("--frame-id", o.frame_id, "frame id");
  backproject->add_option("--out", o.out, "output directory (freespace.ply)")->required();

  auto* eval = app.add_subcommand("eval", "precision, recall and F1 of a mask");
  eval->add_option("--mask", o.mask, "predicted PGM mask")->required();
  eval->add_option("--gt", o.gt, "ground-truth PGM mask")->required();
  eval->add_option("--out", o.out, "output directory (metrics.json)");

  auto* pipeline = app.add_subcommand("pipeline", "run every stage over a frame sequence");
  with_config(pipeline);
  pipeline->add_option("--frames", o.frames, "sequence directory")->required();
  pipeline->add_option("--gt", o.gt, "ground-truth file name inside each frame directory");
  pipeline->add_option("--out", o.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*synth) return run_synth(o);
    if (*fit_plane) return run_fit_plane(o);
    if (*fit_boxes) return run_fit_boxes(o);
    if (*segment) return run_segment(o);
    if (*backproject) return run_backproject(o);
    if (*eval) return run_eval(o);
    if (*pipeline) return run_full(o);
  } catch (const NoPlaneFound& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoPlane;
  } catch (const InvariantViolation& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON input: " << e.what() << '\n';
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
