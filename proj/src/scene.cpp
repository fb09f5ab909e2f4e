// SPDX-License-Identifier: Apache-2.0
#include "meshtri/scene.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

namespace meshtri {

namespace {

// Portable uniform draw in [lo, hi) from the top 53 bits of the engine.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage ") + name + ": " + e.what());
  }
}

// Draw-range multipliers for wrists and hands, and for the spine, neck,
// collars and head.
constexpr double kWristScale = 0.1;
constexpr double kAxialScale = 0.5;

}  // namespace

void SceneConfig::validate() const {
  if (views < 1) throw Error(ErrorCode::InvalidConfig, "views must be >= 1");
  if (!(pose_magnitude >= 0.0) || !(shape_magnitude >= 0.0) || !(yaw_range >= 0.0))
    throw Error(ErrorCode::InvalidConfig, "magnitudes must be >= 0");
  if (!(camera_radius > 0.0) || !(focal > 0.0) || image_size < 2)
    throw Error(ErrorCode::InvalidConfig, "camera radius, focal length and image size must be positive");
  if (!(cuboid_side > 0.0)) throw Error(ErrorCode::InvalidConfig, "cuboid_side must be positive");
}

Scene gen_scene(const BodyModel& model, const SubsamplingOperator& subop, std::uint64_t seed, const SceneConfig& cfg) {
  cfg.validate();
  subop.validate();
  if (subop.source_v != model.num_vertices())
    throw Error(ErrorCode::InvalidConfig, "subsampling operator does not match the model");
  std::mt19937_64 rng(seed);
  Scene s;
  s.seed = seed;
  s.gt_params = FitParams::neutral(model.pose_dims(), model.num_betas);

  const double m = cfg.pose_magnitude;
  auto& pose = s.gt_params.z;
  for (int j = 1; j < model.num_joints(); ++j) {
    const bool axial = j == 3 || j == 6 || j == 9 || j == 12 || j == 13 || j == 14 || j == 15;
    const double scale = j >= 20 ? kWristScale : (axial ? kAxialScale : 1.0);
    for (int d = 0; d < 3; ++d) pose[3 * (j - 1) + d] = scale * uniform(rng, -m, m);
  }
  for (const auto& h : model.hinge_dofs)
    pose[3 * (h.joint - 1) + h.axis] = -h.sign * uniform(rng, 0.0, 3.0 * m);

  const double yaw = uniform(rng, -cfg.yaw_range, cfg.yaw_range);
  const double pitch = uniform(rng, -cfg.yaw_range / 5, cfg.yaw_range / 5);
  const double roll = uniform(rng, -cfg.yaw_range / 5, cfg.yaw_range / 5);
  const Eigen::Matrix3d g = (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()) *
                             Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()) *
                             Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()))
                                .toRotationMatrix();
  s.gt_params.rot6d = matrix_to_rot6d(Rotation(g));
  for (auto& b : s.gt_params.beta) b = uniform(rng, -cfg.shape_magnitude, cfg.shape_magnitude);
  s.gt_params.t = {uniform(rng, -0.5, 0.5), 0.95, uniform(rng, -0.5, 0.5)};

  s.gt_mesh = lbs_forward(model, pose, rot6d_to_matrix(s.gt_params.rot6d), s.gt_params.beta, s.gt_params.t);
  s.subop = subop;
  s.gt_sub = apply_subsample(subop, s.gt_mesh);
  s.gt_joints = regress_joints(model, s.gt_mesh);
  const Eigen::Vector3d pelvis = s.gt_joints.row(0).transpose();

  for (int c = 0; c < cfg.views; ++c) {
    const double a = 2.0 * std::numbers::pi * c / cfg.views + uniform(rng, -0.3, 0.3);
    const double h = uniform(rng, 0.8, 2.2);
    const Eigen::Vector3d eye(pelvis.x() + cfg.camera_radius * std::sin(a), h,
                              pelvis.z() + cfg.camera_radius * std::cos(a));
    s.cameras.push_back(look_at_camera(eye, pelvis, cfg.focal, cfg.image_size, cfg.image_size));
  }
  s.grid = make_cuboid(pelvis, cfg.cuboid_side, kDefaultResolution);
  if (cfg.cuboid_yaw != 0.0) s.grid = rotate_cuboid_yaw(s.grid, cfg.cuboid_yaw);

  const TriMesh mesh{s.gt_mesh, model.faces};
  for (const auto& cam : s.cameras) s.visibility.push_back(subsample_visibility(visibility(mesh, cam), subop));
  return s;
}

VoxelGrid scene_grid(const Scene& scene, int resolution) {
  VoxelGrid g = make_cuboid(scene.grid.center(), scene.grid.side(), resolution);
  if (scene.grid.yaw() != 0.0) g = rotate_cuboid_yaw(g, scene.grid.yaw());
  return g;
}

Volume render_scene_heatmaps(const Scene& scene, const HeatmapOptions& opts) {
  if (opts.resolution != 16 && opts.resolution != 32 && opts.resolution != 64)
    throw Error(ErrorCode::InvalidDimension, "heatmap resolution must be 16, 32 or 64");
  const VoxelGrid grid = scene_grid(scene, opts.resolution);
  if (opts.zero) return Volume(grid, static_cast<int>(scene.gt_sub.rows()));
  Volume h = render_gaussian_heatmaps(scene.gt_sub, grid, opts.sigma_pitch * grid.pitch());
  if (opts.logit_noise > 0.0) {
    std::mt19937_64 rng(opts.noise_seed);
    std::normal_distribution<double> n(0.0, opts.logit_noise);
    for (double& v : h.values) v += n(rng);
  }
  return h;
}

std::vector<FeatureMap> render_feature_maps(const Scene& scene, int channels, double radius_px, double dropout,
                                            std::uint64_t seed) {
  if (channels < 1) throw Error(ErrorCode::InvalidArgument, "feature maps need at least one channel");
  std::mt19937_64 rng(seed);
  std::vector<FeatureMap> maps;
  const int reach = static_cast<int>(std::ceil(3.0 * radius_px));
  for (std::size_t c = 0; c < scene.cameras.size(); ++c) {
    const auto& cam = scene.cameras[c];
    FeatureMap f(cam.height, cam.width, channels);
    if (dropout > 0.0 && uniform(rng, 0.0, 1.0) < dropout) {
      maps.push_back(std::move(f));
      continue;
    }
    for (Eigen::Index n = 0; n < scene.gt_sub.rows(); ++n) {
      if (!scene.visibility[c][static_cast<std::size_t>(n)]) continue;
      const Eigen::Vector3d p = scene.gt_sub.row(n).transpose();
      if (!(cam.depth(p) > 1e-9)) continue;
      const Eigen::Vector2d px = project_point(cam, p);
      const int k = static_cast<int>(n % channels);
      const int x0 = static_cast<int>(std::lround(px.x())), y0 = static_cast<int>(std::lround(px.y()));
      for (int y = std::max(0, y0 - reach); y <= std::min(cam.height - 1, y0 + reach); ++y)
        for (int x = std::max(0, x0 - reach); x <= std::min(cam.width - 1, x0 + reach); ++x) {
          const double d2 = (x - px.x()) * (x - px.x()) + (y - px.y()) * (y - px.y());
          f.at(y, x, k) = std::max(f.at(y, x, k), std::exp(-d2 / (2.0 * radius_px * radius_px)));
        }
    }
    maps.push_back(std::move(f));
  }
  return maps;
}

TriangulationResult triangulate(const std::vector<FeatureMap>& maps, const std::vector<CameraCalib>& cameras,
                                const VoxelGrid& grid, const std::vector<Volume>* gates) {
  if (maps.size() != cameras.size())
    throw Error(ErrorCode::ShapeMismatch, std::to_string(maps.size()) + " feature maps for " +
                                              std::to_string(cameras.size()) + " cameras");
  TriangulationResult out;
  std::vector<Volume> vols;
  for (std::size_t c = 0; c < maps.size(); ++c) {
    Unprojection u = unproject(maps[c], grid, cameras[c]);
    out.behind_camera += u.behind_camera;
    vols.push_back(std::move(u.volume));
  }
  out.aggregation = gates ? aggregate_visibility_gated(vols, *gates) : aggregate_softmax(vols);
  const int l = grid.resolution();
  out.pelvis_confidence = confidence_profile(out.aggregation.weights, grid.flat_index(l / 2, l / 2, l / 2));
  return out;
}

MetricReport evaluate_fit(const FitResult& fit, const Scene& scene, const FitConfig& cfg) {
  EvalInput in;
  in.pred_joints = fit.joints;
  in.gt_joints = scene.gt_joints;
  in.pred_mesh = fit.fitted_mesh;
  in.gt_mesh = scene.gt_mesh;
  const std::vector<double> pose = decode_pose(fit.params, cfg);
  in.pred_rots = table_rotations(pose, rot6d_to_matrix(fit.params.rot6d));
  in.gt_rots = table_rotations(scene.gt_params.z, rot6d_to_matrix(scene.gt_params.rot6d));
  return evaluate(in);
}

PipelineResult run_pipeline(const BodyModel& model, const Scene& scene, const PipelineConfig& cfg) {
  PipelineResult r;
  r.decoded = stage("decode", [&] {
    const Volume logits = render_scene_heatmaps(scene, cfg.heatmaps);
    return soft_argmax(heatmap_normalize(logits));
  });
  r.vertex_l1 = vertex_l1_loss(r.decoded, scene.gt_sub);
  r.decode_max_error_mm = 1000.0 * (r.decoded - scene.gt_sub).rowwise().norm().maxCoeff();
  r.pelvis_confidence = stage("triangulate", [&] {
    const auto maps = render_feature_maps(scene, cfg.feature_channels);
    return triangulate(maps, scene.cameras, scene_grid(scene, cfg.feature_resolution)).pelvis_confidence;
  });
  r.fit = stage("fit", [&] {
    if (!cfg.optimum_start) return fit(model, r.decoded, scene.subop, cfg.fit);
    FitParams init = scene.gt_params;
    if (cfg.fit.pose_prior) throw Error(ErrorCode::InvalidConfig, "optimum start requires the direct pose prior");
    return fit(model, r.decoded, scene.subop, cfg.fit, &init);
  });
  r.metrics = stage("eval", [&] { return evaluate_fit(r.fit, scene, cfg.fit); });
  return r;
}

}  // namespace meshtri
