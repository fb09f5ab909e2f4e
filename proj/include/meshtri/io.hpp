// SPDX-License-Identifier: Apache-2.0
//
// JSON serialization of cameras, sub-sampling operators, fit inputs and
// results, run configurations and scene bundle directories.
//
// Every top-level document carries "schema_version"; readers reject other
// versions and unknown fields. Doubles are written with 17 significant
// digits so values round-trip exactly.
#pragma once

#include <string>
#include <vector>

#include "meshtri/body_model.hpp"
#include "meshtri/camera.hpp"
#include "meshtri/fitting.hpp"
#include "meshtri/mesh.hpp"
#include "meshtri/scene.hpp"

namespace meshtri {

inline constexpr int kSchemaVersion = 1;

/// One camera: {intrinsics[9], rotation[9], translation[3], image_size[H, W]}.
std::string camera_to_json(const CameraCalib& cam);
CameraCalib camera_from_json(const std::string& text, const std::string& what = "camera");
void save_camera(const CameraCalib& cam, const std::string& path);
/// Accepts a single camera object or an array of them (a rig).
std::vector<CameraCalib> load_cameras(const std::string& path);

/// {source_V, kept_indices}.
std::string subop_to_json(const SubsamplingOperator& op);
SubsamplingOperator subop_from_json(const std::string& text, const std::string& what = "subop");
void save_subop(const SubsamplingOperator& op, const std::string& path);
SubsamplingOperator load_subop(const std::string& path);

/// {schema_version, points: [[x, y, z], ...]}.
void save_points(const Points& pts, const std::string& path);
Points load_points(const std::string& path);

/// {schema_version, learning_rate, iterations, lambda_w, lambda_z,
/// lambda_beta, lambda_alpha, seed, data_term}; missing fields keep the
/// defaults.
std::string fit_config_to_json(const FitConfig& cfg);
FitConfig fit_config_from_json(const std::string& text, const std::string& what = "fit config");

std::string fit_params_to_json(const FitParams& p);
FitParams fit_params_from_json(const std::string& text, const std::string& what = "fit params");

/// {schema_version, params, term_breakdown, cost_trace, mesh_obj}.
std::string fit_result_to_json(const FitResult& r, const std::string& mesh_obj_path);
FitParams fit_result_params(const std::string& path);

/// Options of the `pipeline` command.
struct RunConfig {
  std::uint64_t seed = 7;
  /// Sub-vertex preset (431, 216, 108 or 54).
  int sub = 108;
  /// Toy-model vertex budget.
  int vertex_budget = 1500;
  SceneConfig scene;
  PipelineConfig pipeline;

  void validate() const;
};

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text, const std::string& what = "run config");

std::string grid_to_json(const VoxelGrid& grid);
VoxelGrid grid_from_json(const std::string& text, const std::string& what = "grid");

/// Scene bundle: cameras/cam_<c>.json, model.body(+.bin), gt.json,
/// grid.json and, when `heatmaps` is given, heatmaps.bin(+.json).
void save_scene_bundle(const std::string& dir, const BodyModel& model, const Scene& scene,
                       const Volume* heatmaps = nullptr);

struct SceneBundle {
  BodyModel model;
  Scene scene;
};

/// Rebuilds meshes, joints and visibility from the stored parameters.
SceneBundle load_scene_bundle(const std::string& dir);

}  // namespace meshtri
