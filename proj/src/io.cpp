// SPDX-License-Identifier: Apache-2.0
#include "meshtri/io.hpp"

#include <algorithm>
#include <filesystem>

#include "json_util.hpp"

namespace meshtri {

namespace {

namespace fs = std::filesystem;
using jsonio::ojson;
using nlohmann::json;

template <class M>
std::vector<double> flat(const M& m) {
  std::vector<double> out;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

std::vector<double> fixed_list(const json& j, const char* key, std::size_t n, const std::string& what) {
  const auto v = jsonio::get<std::vector<double>>(j, key, what);
  if (v.size() != n)
    throw Error(ErrorCode::ParseError, what + ": field '" + key + "' needs " + std::to_string(n) + " numbers, got " +
                                           std::to_string(v.size()));
  return v;
}

void check_version(const json& j, const std::string& what) {
  const int v = jsonio::get<int>(j, "schema_version", what);
  if (v != kSchemaVersion)
    throw Error(ErrorCode::InvalidConfig,
                what + ": schema_version " + std::to_string(v) + " (supported: " + std::to_string(kSchemaVersion) + ")");
}

ojson camera_obj(const CameraCalib& cam) {
  return {{"intrinsics", flat(cam.intrinsics)},
          {"rotation", flat(cam.rotation)},
          {"translation", flat(cam.translation.transpose())},
          {"image_size", {cam.height, cam.width}}};
}

CameraCalib camera_from(const json& j, const std::string& what) {
  jsonio::reject_unknown(j, {"schema_version", "intrinsics", "rotation", "translation", "image_size"}, what);
  if (j.contains("schema_version")) check_version(j, what);
  CameraCalib cam;
  const auto k = fixed_list(j, "intrinsics", 9, what);
  const auto r = fixed_list(j, "rotation", 9, what);
  const auto t = fixed_list(j, "translation", 3, what);
  const auto hw = jsonio::get<std::vector<int>>(j, "image_size", what);
  if (hw.size() != 2) throw Error(ErrorCode::ParseError, what + ": image_size needs [H, W]");
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      cam.intrinsics(a, b) = k[3 * a + b];
      cam.rotation(a, b) = r[3 * a + b];
    }
    cam.translation[a] = t[a];
  }
  cam.height = hw[0];
  cam.width = hw[1];
  cam.validate();
  return cam;
}

ojson subop_obj(const SubsamplingOperator& op) {
  return {{"source_V", op.source_v}, {"kept_indices", op.kept_indices}};
}

SubsamplingOperator subop_from(const json& j, const std::string& what) {
  jsonio::reject_unknown(j, {"schema_version", "source_V", "kept_indices"}, what);
  if (j.contains("schema_version")) check_version(j, what);
  SubsamplingOperator op;
  op.source_v = jsonio::get<int>(j, "source_V", what);
  op.kept_indices = jsonio::get<std::vector<int>>(j, "kept_indices", what);
  op.validate();
  return op;
}

ojson params_obj(const FitParams& p) {
  return {{"z", p.z},
          {"rot6d", std::vector<double>(p.rot6d.begin(), p.rot6d.end())},
          {"beta", p.beta},
          {"t", {p.t.x(), p.t.y(), p.t.z()}}};
}

FitParams params_from(const json& j, const std::string& what) {
  jsonio::reject_unknown(j, {"schema_version", "z", "rot6d", "beta", "t"}, what);
  if (j.contains("schema_version")) check_version(j, what);
  FitParams p;
  p.z = jsonio::get<std::vector<double>>(j, "z", what);
  const auto r = fixed_list(j, "rot6d", 6, what);
  std::copy(r.begin(), r.end(), p.rot6d.begin());
  p.beta = jsonio::get<std::vector<double>>(j, "beta", what);
  const auto t = fixed_list(j, "t", 3, what);
  p.t = {t[0], t[1], t[2]};
  return p;
}

ojson fit_config_obj(const FitConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"iterations", c.iterations},
          {"lambda_w", c.lambda_w},
          {"lambda_z", c.lambda_z},
          {"lambda_beta", c.lambda_beta},
          {"lambda_alpha", c.lambda_alpha},
          {"seed", c.seed},
          {"data_term", c.data_term == DataTerm::Vertices ? "vertices" : "joints"}};
}

FitConfig fit_config_from(const json& j, const std::string& what) {
  jsonio::reject_unknown(j,
                         {"schema_version", "learning_rate", "iterations", "lambda_w", "lambda_z", "lambda_beta",
                          "lambda_alpha", "seed", "data_term"},
                         what);
  if (j.contains("schema_version")) check_version(j, what);
  FitConfig c;
  if (j.contains("learning_rate")) c.learning_rate = jsonio::get<double>(j, "learning_rate", what);
  if (j.contains("iterations")) c.iterations = jsonio::get<int>(j, "iterations", what);
  if (j.contains("lambda_w")) c.lambda_w = jsonio::get<double>(j, "lambda_w", what);
  if (j.contains("lambda_z")) c.lambda_z = jsonio::get<double>(j, "lambda_z", what);
  if (j.contains("lambda_beta")) c.lambda_beta = jsonio::get<double>(j, "lambda_beta", what);
  if (j.contains("lambda_alpha")) c.lambda_alpha = jsonio::get<double>(j, "lambda_alpha", what);
  if (j.contains("seed")) c.seed = jsonio::get<std::uint64_t>(j, "seed", what);
  if (j.contains("data_term")) {
    const auto d = jsonio::get<std::string>(j, "data_term", what);
    if (d == "vertices")
      c.data_term = DataTerm::Vertices;
    else if (d == "joints")
      c.data_term = DataTerm::Joints;
    else
      throw Error(ErrorCode::InvalidConfig, what + ": data_term must be \"vertices\" or \"joints\"");
  }
  c.validate();
  return c;
}

ojson grid_obj(const VoxelGrid& g) {
  return {{"center", {g.center().x(), g.center().y(), g.center().z()}},
          {"side", g.side()},
          {"resolution", g.resolution()},
          {"yaw", g.yaw()}};
}

VoxelGrid grid_from(const json& j, const std::string& what) {
  jsonio::reject_unknown(j, {"schema_version", "center", "side", "resolution", "yaw"}, what);
  if (j.contains("schema_version")) check_version(j, what);
  const auto c = fixed_list(j, "center", 3, what);
  VoxelGrid g = make_cuboid({c[0], c[1], c[2]}, jsonio::get<double>(j, "side", what), jsonio::get<int>(j, "resolution", what));
  const double yaw = j.contains("yaw") ? jsonio::get<double>(j, "yaw", what) : 0.0;
  return yaw != 0.0 ? rotate_cuboid_yaw(g, yaw) : g;
}

ojson with_version(ojson body) {
  ojson out = {{"schema_version", kSchemaVersion}};
  for (auto it = body.begin(); it != body.end(); ++it) out[it.key()] = it.value();
  return out;
}

template <class T>
void read_opt(const json& j, const char* key, T& dst, const std::string& what) {
  if (j.contains(key)) dst = jsonio::get<T>(j, key, what);
}

}  // namespace

std::string camera_to_json(const CameraCalib& cam) { return jsonio::dump(with_version(camera_obj(cam))); }

CameraCalib camera_from_json(const std::string& text, const std::string& what) {
  return camera_from(jsonio::parse(text, what), what);
}

void save_camera(const CameraCalib& cam, const std::string& path) { jsonio::write_text(path, camera_to_json(cam)); }

std::vector<CameraCalib> load_cameras(const std::string& path) {
  const json j = jsonio::parse_file(path);
  std::vector<CameraCalib> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(camera_from(j[i], path + "[" + std::to_string(i) + "]"));
    if (out.empty()) throw Error(ErrorCode::ParseError, path + ": empty camera rig");
  } else {
    out.push_back(camera_from(j, path));
  }
  return out;
}

std::string subop_to_json(const SubsamplingOperator& op) { return jsonio::dump(with_version(subop_obj(op))); }

SubsamplingOperator subop_from_json(const std::string& text, const std::string& what) {
  return subop_from(jsonio::parse(text, what), what);
}

void save_subop(const SubsamplingOperator& op, const std::string& path) { jsonio::write_text(path, subop_to_json(op)); }

SubsamplingOperator load_subop(const std::string& path) { return subop_from(jsonio::parse_file(path), path); }

void save_points(const Points& pts, const std::string& path) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < pts.rows(); ++r) rows.push_back({pts(r, 0), pts(r, 1), pts(r, 2)});
  jsonio::write_text(path, jsonio::dump({{"schema_version", kSchemaVersion}, {"points", rows}}));
}

Points load_points(const std::string& path) {
  const json j = jsonio::parse_file(path);
  jsonio::reject_unknown(j, {"schema_version", "points"}, path);
  check_version(j, path);
  const auto rows = jsonio::get<std::vector<std::vector<double>>>(j, "points", path);
  Points pts(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != 3)
      throw Error(ErrorCode::ParseError, path + ": point " + std::to_string(r) + " needs 3 coordinates");
    for (int d = 0; d < 3; ++d) pts(static_cast<Eigen::Index>(r), d) = rows[r][d];
  }
  return pts;
}

std::string fit_config_to_json(const FitConfig& cfg) { return jsonio::dump(with_version(fit_config_obj(cfg))); }

FitConfig fit_config_from_json(const std::string& text, const std::string& what) {
  const json j = jsonio::parse(text, what);
  check_version(j, what);
  return fit_config_from(j, what);
}

std::string fit_params_to_json(const FitParams& p) { return jsonio::dump(with_version(params_obj(p))); }

FitParams fit_params_from_json(const std::string& text, const std::string& what) {
  return params_from(jsonio::parse(text, what), what);
}

std::string fit_result_to_json(const FitResult& r, const std::string& mesh_obj_path) {
  const TermBreakdown& t = r.terms;
  const ojson terms = {{"data", t.data}, {"z", t.z},     {"beta", t.beta},  {"wrist", t.wrist},
                       {"alpha", t.alpha}, {"reg", t.reg}, {"total", t.total}};
  return jsonio::dump({{"schema_version", kSchemaVersion},
                       {"params", params_obj(r.params)},
                       {"term_breakdown", terms},
                       {"cost_trace", r.cost_trace},
                       {"mesh_obj", mesh_obj_path}});
}

FitParams fit_result_params(const std::string& path) {
  const json j = jsonio::parse_file(path);
  jsonio::reject_unknown(j, {"schema_version", "params", "term_breakdown", "cost_trace", "mesh_obj"}, path);
  check_version(j, path);
  if (!j.contains("params")) throw Error(ErrorCode::ParseError, path + ": missing field 'params'");
  return params_from(j.at("params"), path + ": params");
}

void RunConfig::validate() const {
  if (std::find(std::begin(kSubsamplePresets), std::end(kSubsamplePresets), sub) == std::end(kSubsamplePresets))
    throw Error(ErrorCode::InvalidConfig, "sub must be one of 431, 216, 108, 54 (got " + std::to_string(sub) + ")");
  if (vertex_budget < sub) throw Error(ErrorCode::InvalidConfig, "vertex_budget must be at least sub");
  scene.validate();
  pipeline.fit.validate();
  const int res = pipeline.heatmaps.resolution;
  if (res != 16 && res != 32 && res != 64) throw Error(ErrorCode::InvalidConfig, "heatmap resolution must be 16, 32 or 64");
  if (pipeline.feature_channels < 1 || pipeline.feature_resolution < 1)
    throw Error(ErrorCode::InvalidConfig, "feature channels and resolution must be positive");
}

std::string run_config_to_json(const RunConfig& c) {
  const SceneConfig& s = c.scene;
  const HeatmapOptions& h = c.pipeline.heatmaps;
  const ojson scene = {{"views", s.views},
                       {"pose_magnitude", s.pose_magnitude},
                       {"shape_magnitude", s.shape_magnitude},
                       {"yaw_range", s.yaw_range},
                       {"camera_radius", s.camera_radius},
                       {"focal", s.focal},
                       {"image_size", s.image_size},
                       {"cuboid_side", s.cuboid_side},
                       {"cuboid_yaw", s.cuboid_yaw}};
  const ojson heat = {{"resolution", h.resolution},
                      {"sigma_pitch", h.sigma_pitch},
                      {"logit_noise", h.logit_noise},
                      {"zero", h.zero},
                      {"noise_seed", h.noise_seed}};
  return jsonio::dump({{"schema_version", kSchemaVersion},
                       {"seed", c.seed},
                       {"sub", c.sub},
                       {"vertex_budget", c.vertex_budget},
                       {"scene", scene},
                       {"heatmaps", heat},
                       {"fit", fit_config_obj(c.pipeline.fit)},
                       {"feature_channels", c.pipeline.feature_channels},
                       {"feature_resolution", c.pipeline.feature_resolution},
                       {"optimum_start", c.pipeline.optimum_start}});
}

RunConfig run_config_from_json(const std::string& text, const std::string& what) {
  const json j = jsonio::parse(text, what);
  jsonio::reject_unknown(j,
                         {"schema_version", "seed", "sub", "vertex_budget", "scene", "heatmaps", "fit",
                          "feature_channels", "feature_resolution", "optimum_start"},
                         what);
  check_version(j, what);
  RunConfig c;
  read_opt(j, "seed", c.seed, what);
  read_opt(j, "sub", c.sub, what);
  read_opt(j, "vertex_budget", c.vertex_budget, what);
  if (j.contains("scene")) {
    const json& s = j.at("scene");
    const std::string w = what + ": scene";
    jsonio::reject_unknown(s,
                           {"views", "pose_magnitude", "shape_magnitude", "yaw_range", "camera_radius", "focal",
                            "image_size", "cuboid_side", "cuboid_yaw"},
                           w);
    read_opt(s, "views", c.scene.views, w);
    read_opt(s, "pose_magnitude", c.scene.pose_magnitude, w);
    read_opt(s, "shape_magnitude", c.scene.shape_magnitude, w);
    read_opt(s, "yaw_range", c.scene.yaw_range, w);
    read_opt(s, "camera_radius", c.scene.camera_radius, w);
    read_opt(s, "focal", c.scene.focal, w);
    read_opt(s, "image_size", c.scene.image_size, w);
    read_opt(s, "cuboid_side", c.scene.cuboid_side, w);
    read_opt(s, "cuboid_yaw", c.scene.cuboid_yaw, w);
  }
  if (j.contains("heatmaps")) {
    const json& h = j.at("heatmaps");
    const std::string w = what + ": heatmaps";
    jsonio::reject_unknown(h, {"resolution", "sigma_pitch", "logit_noise", "zero", "noise_seed"}, w);
    auto& o = c.pipeline.heatmaps;
    read_opt(h, "resolution", o.resolution, w);
    read_opt(h, "sigma_pitch", o.sigma_pitch, w);
    read_opt(h, "logit_noise", o.logit_noise, w);
    read_opt(h, "zero", o.zero, w);
    read_opt(h, "noise_seed", o.noise_seed, w);
  }
  if (j.contains("fit")) c.pipeline.fit = fit_config_from(j.at("fit"), what + ": fit");
  read_opt(j, "feature_channels", c.pipeline.feature_channels, what);
  read_opt(j, "feature_resolution", c.pipeline.feature_resolution, what);
  read_opt(j, "optimum_start", c.pipeline.optimum_start, what);
  c.validate();
  return c;
}

std::string grid_to_json(const VoxelGrid& grid) { return jsonio::dump(with_version(grid_obj(grid))); }

VoxelGrid grid_from_json(const std::string& text, const std::string& what) {
  return grid_from(jsonio::parse(text, what), what);
}

void save_scene_bundle(const std::string& dir, const BodyModel& model, const Scene& scene, const Volume* heatmaps) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root / "cameras", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + (root / "cameras").string() + ": " + ec.message());
  for (std::size_t c = 0; c < scene.cameras.size(); ++c) {
    char name[32];
    std::snprintf(name, sizeof name, "cam_%02zu.json", c);
    save_camera(scene.cameras[c], (root / "cameras" / name).string());
  }
  save_model(model, (root / "model.body").string());
  jsonio::write_text((root / "gt.json").string(), jsonio::dump({{"schema_version", kSchemaVersion},
                                                                {"seed", scene.seed},
                                                                {"params", params_obj(scene.gt_params)},
                                                                {"subop", subop_obj(scene.subop)}}));
  jsonio::write_text((root / "grid.json").string(), grid_to_json(scene.grid));
  if (heatmaps) save_volume(*heatmaps, (root / "heatmaps.bin").string());
}

SceneBundle load_scene_bundle(const std::string& dir) {
  const fs::path root(dir);
  SceneBundle b;
  b.model = load_model((root / "model.body").string());
  Scene& s = b.scene;

  const std::string gt_path = (root / "gt.json").string();
  const json gt = jsonio::parse_file(gt_path);
  jsonio::reject_unknown(gt, {"schema_version", "seed", "params", "subop"}, gt_path);
  check_version(gt, gt_path);
  s.seed = jsonio::get<std::uint64_t>(gt, "seed", gt_path);
  if (!gt.contains("params") || !gt.contains("subop"))
    throw Error(ErrorCode::ParseError, gt_path + ": needs 'params' and 'subop'");
  s.gt_params = params_from(gt.at("params"), gt_path + ": params");
  s.subop = subop_from(gt.at("subop"), gt_path + ": subop");
  if (s.subop.source_v != b.model.num_vertices())
    throw Error(ErrorCode::InvalidConfig, gt_path + ": subop does not match the model");
  if (static_cast<int>(s.gt_params.z.size()) != b.model.pose_dims() ||
      static_cast<int>(s.gt_params.beta.size()) != b.model.num_betas)
    throw Error(ErrorCode::DimensionMismatch, gt_path + ": params do not match the model");

  s.grid = grid_from(jsonio::parse_file((root / "grid.json").string()), (root / "grid.json").string());

  std::vector<fs::path> cams;
  const fs::path cam_dir = root / "cameras";
  if (!fs::is_directory(cam_dir)) throw Error(ErrorCode::IoError, "missing " + cam_dir.string());
  for (const auto& e : fs::directory_iterator(cam_dir))
    if (e.path().extension() == ".json") cams.push_back(e.path());
  std::sort(cams.begin(), cams.end());
  if (cams.empty()) throw Error(ErrorCode::IoError, cam_dir.string() + " holds no cameras");
  for (const auto& p : cams)
    for (auto& c : load_cameras(p.string())) s.cameras.push_back(std::move(c));

  s.gt_mesh = lbs_forward(b.model, s.gt_params.z, rot6d_to_matrix(s.gt_params.rot6d), s.gt_params.beta, s.gt_params.t);
  s.gt_sub = apply_subsample(s.subop, s.gt_mesh);
  s.gt_joints = regress_joints(b.model, s.gt_mesh);
  const TriMesh mesh{s.gt_mesh, b.model.faces};
  for (const auto& cam : s.cameras) s.visibility.push_back(subsample_visibility(visibility(mesh, cam), s.subop));
  return b;
}

}  // namespace meshtri
