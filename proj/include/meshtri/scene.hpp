// SPDX-License-Identifier: Apache-2.0
//
// Seeded multi-camera scenes with ground-truth body parameters, and the
// end-to-end pipeline that decodes rendered heatmaps and fits the model.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "meshtri/body_model.hpp"
#include "meshtri/fitting.hpp"
#include "meshtri/mesh.hpp"
#include "meshtri/metrics.hpp"
#include "meshtri/volumetric.hpp"

namespace meshtri {

struct SceneConfig {
  int views = 4;
  /// Uniform half-range (radians) of free joint angles.
  double pose_magnitude = 0.3;
  /// Uniform half-range of each shape coefficient.
  double shape_magnitude = 1.0;
  /// Uniform half-range of the global yaw; tilts are a fifth of it.
  double yaw_range = 0.5;
  double camera_radius = 4.0;
  double focal = 1000.0;
  int image_size = 1000;
  double cuboid_side = kDefaultCuboidSide;
  /// Cuboid rotation about the vertical axis (augmentation), radians.
  double cuboid_yaw = 0.0;

  void validate() const;
};

struct Scene {
  std::uint64_t seed = 0;
  FitParams gt_params;            // direct pose code
  Points gt_mesh;
  Points gt_sub;
  Points gt_joints;               // 17 x 3
  SubsamplingOperator subop;
  std::vector<CameraCalib> cameras;
  VoxelGrid grid;                 // default resolution; re-made per heatmap resolution
  std::vector<VisibilityMap> visibility;  // per camera, over sub-vertices
};

Scene gen_scene(const BodyModel& model, const SubsamplingOperator& subop, std::uint64_t seed,
                const SceneConfig& cfg = {});

/// Same cuboid with a different resolution.
VoxelGrid scene_grid(const Scene& scene, int resolution);

struct HeatmapOptions {
  int resolution = 64;
  /// Gaussian width in voxel pitches.
  double sigma_pitch = 1.5;
  /// Standard deviation of additive logit noise.
  double logit_noise = 0.0;
  /// Replace every channel by zeros (uniform after normalization).
  bool zero = false;
  std::uint64_t noise_seed = 0;
};

Volume render_scene_heatmaps(const Scene& scene, const HeatmapOptions& opts);

/// Per-camera K-channel images: channel k splats the visible sub-vertices
/// n with n mod K == k as Gaussians of `radius_px`.
std::vector<FeatureMap> render_feature_maps(const Scene& scene, int channels, double radius_px = 4.0,
                                            double dropout = 0.0, std::uint64_t seed = 0);

struct TriangulationResult {
  Aggregation aggregation;
  std::vector<double> pelvis_confidence;  // d̄_c at the cuboid center voxel
  std::size_t behind_camera = 0;
};

TriangulationResult triangulate(const std::vector<FeatureMap>& maps, const std::vector<CameraCalib>& cameras,
                                const VoxelGrid& grid, const std::vector<Volume>* gates = nullptr);

struct PipelineConfig {
  HeatmapOptions heatmaps;
  FitConfig fit;
  int feature_channels = 4;
  int feature_resolution = 16;
  /// Start the fit at the ground-truth parameters instead of neutral.
  bool optimum_start = false;
};

struct PipelineResult {
  Points decoded;  // soft-argmax sub-vertices
  double vertex_l1 = 0.0;
  double decode_max_error_mm = 0.0;
  std::vector<double> pelvis_confidence;
  FitResult fit;
  MetricReport metrics;
};

PipelineResult run_pipeline(const BodyModel& model, const Scene& scene, const PipelineConfig& cfg);

/// Metrics of a fitted result against the scene ground truth.
MetricReport evaluate_fit(const FitResult& fit, const Scene& scene, const FitConfig& cfg);

}  // namespace meshtri
