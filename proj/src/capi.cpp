// SPDX-License-Identifier: Apache-2.0
#include "meshtri/meshtri.h"

#include <cstring>
#include <memory>
#include <string>

#include "json_util.hpp"
#include "meshtri/io.hpp"
#include "meshtri/scene.hpp"

struct mt_model {
  std::shared_ptr<const meshtri::BodyModel> model;
};
struct mt_mesh {
  meshtri::TriMesh mesh;
};
struct mt_subop {
  meshtri::SubsamplingOperator op;
};
struct mt_cameras {
  std::vector<meshtri::CameraCalib> cams;
};
struct mt_scene {
  meshtri::Scene scene;
};
struct mt_volume {
  meshtri::Volume vol;
};
struct mt_fit_result {
  std::shared_ptr<const meshtri::BodyModel> model;
  meshtri::FitConfig cfg;
  meshtri::FitResult result;
};
struct mt_report {
  meshtri::MetricReport report;
};
struct mt_run_config {
  meshtri::RunConfig cfg;
};

namespace {

using namespace meshtri;

thread_local std::string g_last_error;

struct BufferTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

mt_status fail(mt_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <class Fn>
mt_status guard(Fn&& fn) noexcept {
  try {
    fn();
    return MT_OK;
  } catch (const Error& e) {
    return fail(static_cast<mt_status>(static_cast<int>(e.code())), e.what());
  } catch (const BufferTooSmall& e) {
    return fail(MT_BUFFER_TOO_SMALL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MT_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MT_INTERNAL, e.what());
  }
}

void require(const void* p, const char* name) {
  if (!p) throw Error(ErrorCode::InvalidArgument, std::string(name) + " is NULL");
}

// Copies `n` items into a caller buffer, reporting the needed count first.
template <class T>
void emit(const T* src, std::size_t n, T* out, std::size_t capacity, std::size_t* out_count) {
  if (out_count) *out_count = n;
  if (!out) return;
  if (capacity < n)
    throw BufferTooSmall("buffer holds " + std::to_string(capacity) + " values, need " + std::to_string(n));
  std::copy(src, src + n, out);
}

void emit_points(const Points& p, double* out, std::size_t capacity, std::size_t* out_count) {
  if (out_count) *out_count = static_cast<std::size_t>(p.rows());
  if (!out) return;
  const std::size_t need = static_cast<std::size_t>(p.rows()) * 3;
  if (capacity < static_cast<std::size_t>(p.rows()))
    throw BufferTooSmall("buffer holds " + std::to_string(capacity) + " points, need " + std::to_string(p.rows()));
  std::copy(p.data(), p.data() + need, out);
}

Points points_from(const double* data, std::size_t count) {
  Points p(static_cast<Eigen::Index>(count), 3);
  std::copy(data, data + 3 * count, p.data());
  return p;
}

FitConfig to_cpp(const mt_fit_config& c) {
  FitConfig f;
  f.learning_rate = c.learning_rate;
  f.iterations = c.iterations;
  f.lambda_w = c.lambda_w;
  f.lambda_z = c.lambda_z;
  f.lambda_beta = c.lambda_beta;
  f.lambda_alpha = c.lambda_alpha;
  f.seed = c.seed;
  f.data_term = c.joints_data_term ? DataTerm::Joints : DataTerm::Vertices;
  return f;
}

mt_fit_config to_c(const FitConfig& f) {
  return {f.learning_rate, f.iterations, f.lambda_w,  f.lambda_z,
          f.lambda_beta,   f.lambda_alpha, f.seed, f.data_term == DataTerm::Joints ? 1 : 0};
}

SceneConfig to_cpp(const mt_scene_config& c) {
  SceneConfig s;
  s.views = c.views;
  s.pose_magnitude = c.pose_magnitude;
  s.shape_magnitude = c.shape_magnitude;
  s.yaw_range = c.yaw_range;
  s.camera_radius = c.camera_radius;
  s.focal = c.focal;
  s.image_size = c.image_size;
  s.cuboid_side = c.cuboid_side;
  s.cuboid_yaw = c.cuboid_yaw;
  return s;
}

HeatmapOptions to_cpp(const mt_heatmap_options& o) {
  HeatmapOptions h;
  h.resolution = o.resolution;
  h.sigma_pitch = o.sigma_pitch;
  h.logit_noise = o.logit_noise;
  h.zero = o.zero != 0;
  h.noise_seed = o.noise_seed;
  return h;
}

}  // namespace

extern "C" {

const char* mt_version(void) { return "0.1.0"; }

const char* mt_last_error(void) { return g_last_error.c_str(); }

const char* mt_status_name(mt_status status) {
  switch (status) {
    case MT_OK: return "Ok";
    case MT_BUFFER_TOO_SMALL: return "BufferTooSmall";
    case MT_INTERNAL: return "Internal";
    default:
      if (status >= MT_INVALID_ARGUMENT && status <= MT_LENGTH_MISMATCH)
        return error_code_name(static_cast<ErrorCode>(static_cast<int>(status)));
      return "Unknown";
  }
}

mt_status mt_heatmap_megabytes(int resolution, int vertices, double* out_mb) {
  return guard([&] {
    require(out_mb, "out_mb");
    if (resolution < 1 || vertices < 1)
      throw Error(ErrorCode::InvalidArgument, "resolution and vertex count must be positive");
    *out_mb = heatmap_megabytes(resolution, vertices);
  });
}

mt_status mt_model_make_toy(uint64_t seed, int vertex_budget, mt_model** out) {
  return guard([&] {
    require(out, "out");
    *out = new mt_model{std::make_shared<const BodyModel>(make_toy_model(seed, vertex_budget))};
  });
}

mt_status mt_model_load(const char* path, mt_model** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new mt_model{std::make_shared<const BodyModel>(load_model(path))};
  });
}

mt_status mt_model_save(const mt_model* model, const char* path) {
  return guard([&] {
    require(model, "model");
    require(path, "path");
    save_model(*model->model, path);
  });
}

int mt_model_num_vertices(const mt_model* model) { return model ? model->model->num_vertices() : 0; }

mt_status mt_model_template_mesh(const mt_model* model, mt_mesh** out) {
  return guard([&] {
    require(model, "model");
    require(out, "out");
    *out = new mt_mesh{TriMesh{model->model->template_verts, model->model->faces}};
  });
}

void mt_model_free(mt_model* model) { delete model; }

mt_status mt_mesh_load_obj(const char* path, mt_mesh** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new mt_mesh{import_obj(path)};
  });
}

mt_status mt_mesh_save_obj(const mt_mesh* mesh, const char* path) {
  return guard([&] {
    require(mesh, "mesh");
    require(path, "path");
    export_obj(mesh->mesh, path);
  });
}

int mt_mesh_num_vertices(const mt_mesh* mesh) { return mesh ? mesh->mesh.num_vertices() : 0; }
int mt_mesh_num_faces(const mt_mesh* mesh) { return mesh ? mesh->mesh.num_faces() : 0; }
void mt_mesh_free(mt_mesh* mesh) { delete mesh; }

mt_status mt_decimate(const mt_mesh* mesh, int target_n, mt_mesh** out_mesh, mt_subop** out_op) {
  return guard([&] {
    require(mesh, "mesh");
    DecimateResult r = decimate(mesh->mesh, target_n);
    if (out_mesh) *out_mesh = new mt_mesh{std::move(r.mesh)};
    if (out_op) *out_op = new mt_subop{std::move(r.op)};
  });
}

mt_status mt_subop_load(const char* path, mt_subop** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new mt_subop{load_subop(path)};
  });
}

mt_status mt_subop_save(const mt_subop* op, const char* path) {
  return guard([&] {
    require(op, "op");
    require(path, "path");
    save_subop(op->op, path);
  });
}

int mt_subop_size(const mt_subop* op) { return op ? op->op.size() : 0; }
void mt_subop_free(mt_subop* op) { delete op; }

mt_status mt_cameras_load(const char* path, mt_cameras** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new mt_cameras{load_cameras(path)};
  });
}

int mt_cameras_count(const mt_cameras* cams) { return cams ? static_cast<int>(cams->cams.size()) : 0; }
void mt_cameras_free(mt_cameras* cams) { delete cams; }

mt_status mt_visibility(const mt_mesh* mesh, const mt_cameras* cams, int index, int brute_force, uint8_t* out,
                        size_t capacity, size_t* out_count) {
  return guard([&] {
    require(mesh, "mesh");
    require(cams, "cams");
    if (index < 0 || index >= static_cast<int>(cams->cams.size()))
      throw Error(ErrorCode::IndexOutOfRange, "camera " + std::to_string(index) + " of " + std::to_string(cams->cams.size()));
    const auto& cam = cams->cams[static_cast<std::size_t>(index)];
    const VisibilityMap vis = brute_force ? visibility_bruteforce(mesh->mesh, cam) : visibility(mesh->mesh, cam);
    emit(vis.data(), vis.size(), out, capacity, out_count);
  });
}

mt_status mt_points_load(const char* path, double* out, size_t capacity, size_t* out_count) {
  return guard([&] {
    require(path, "path");
    emit_points(load_points(path), out, capacity, out_count);
  });
}

mt_status mt_points_save(const char* path, const double* points, size_t count) {
  return guard([&] {
    require(path, "path");
    if (count) require(points, "points");
    save_points(points_from(points, count), path);
  });
}

void mt_scene_config_default(mt_scene_config* cfg) {
  if (!cfg) return;
  const SceneConfig s;
  *cfg = {s.views, s.pose_magnitude, s.shape_magnitude, s.yaw_range, s.camera_radius,
          s.focal, s.image_size,     s.cuboid_side,     s.cuboid_yaw};
}

mt_status mt_scene_generate(const mt_model* model, const mt_subop* op, uint64_t seed, const mt_scene_config* cfg,
                            mt_scene** out) {
  return guard([&] {
    require(model, "model");
    require(op, "op");
    require(out, "out");
    const SceneConfig sc = cfg ? to_cpp(*cfg) : SceneConfig{};
    *out = new mt_scene{gen_scene(*model->model, op->op, seed, sc)};
  });
}

mt_status mt_scene_save_bundle(const mt_scene* scene, const mt_model* model, const char* dir, const mt_volume* heatmaps) {
  return guard([&] {
    require(scene, "scene");
    require(model, "model");
    require(dir, "dir");
    save_scene_bundle(dir, *model->model, scene->scene, heatmaps ? &heatmaps->vol : nullptr);
  });
}

mt_status mt_scene_load_bundle(const char* dir, mt_scene** out_scene, mt_model** out_model) {
  return guard([&] {
    require(dir, "dir");
    require(out_scene, "out_scene");
    SceneBundle b = load_scene_bundle(dir);
    auto scene = std::make_unique<mt_scene>(mt_scene{std::move(b.scene)});
    if (out_model) *out_model = new mt_model{std::make_shared<const BodyModel>(std::move(b.model))};
    *out_scene = scene.release();
  });
}

mt_status mt_scene_gt_sub(const mt_scene* scene, double* out, size_t capacity, size_t* out_count) {
  return guard([&] {
    require(scene, "scene");
    emit_points(scene->scene.gt_sub, out, capacity, out_count);
  });
}

mt_status mt_scene_subop(const mt_scene* scene, mt_subop** out) {
  return guard([&] {
    require(scene, "scene");
    require(out, "out");
    *out = new mt_subop{scene->scene.subop};
  });
}

mt_status mt_scene_cameras(const mt_scene* scene, mt_cameras** out) {
  return guard([&] {
    require(scene, "scene");
    require(out, "out");
    *out = new mt_cameras{scene->scene.cameras};
  });
}

void mt_scene_free(mt_scene* scene) { delete scene; }

void mt_heatmap_options_default(mt_heatmap_options* opts) {
  if (!opts) return;
  const HeatmapOptions h;
  *opts = {h.resolution, h.sigma_pitch, h.logit_noise, h.zero ? 1 : 0, h.noise_seed};
}

mt_status mt_scene_render_heatmaps(const mt_scene* scene, const mt_heatmap_options* opts, mt_volume** out) {
  return guard([&] {
    require(scene, "scene");
    require(out, "out");
    const HeatmapOptions h = opts ? to_cpp(*opts) : HeatmapOptions{};
    *out = new mt_volume{render_scene_heatmaps(scene->scene, h)};
  });
}

mt_status mt_volume_load(const char* path, mt_volume** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new mt_volume{load_volume(path)};
  });
}

mt_status mt_volume_save(const mt_volume* vol, const char* path) {
  return guard([&] {
    require(vol, "vol");
    require(path, "path");
    save_volume(vol->vol, path);
  });
}

int mt_volume_channels(const mt_volume* vol) { return vol ? vol->vol.channels : 0; }
int mt_volume_resolution(const mt_volume* vol) { return vol ? vol->vol.grid.resolution() : 0; }

mt_status mt_volume_decode(const mt_volume* logits, double* out, size_t capacity, size_t* out_count) {
  return guard([&] {
    require(logits, "logits");
    emit_points(soft_argmax(heatmap_normalize(logits->vol)), out, capacity, out_count);
  });
}

void mt_volume_free(mt_volume* vol) { delete vol; }

mt_status mt_scene_triangulate(const mt_scene* scene, int channels, int resolution, mt_volume** out_aggregate,
                               double* out_confidence, size_t capacity, size_t* out_count) {
  return guard([&] {
    require(scene, "scene");
    if (resolution < 1) throw Error(ErrorCode::InvalidDimension, "resolution must be positive");
    const auto maps = render_feature_maps(scene->scene, channels);
    TriangulationResult t = triangulate(maps, scene->scene.cameras, scene_grid(scene->scene, resolution));
    emit(t.pelvis_confidence.data(), t.pelvis_confidence.size(), out_confidence, capacity, out_count);
    if (out_aggregate) *out_aggregate = new mt_volume{std::move(t.aggregation.aggregate)};
  });
}

void mt_fit_config_default(mt_fit_config* cfg) {
  if (cfg) *cfg = to_c(FitConfig{});
}

mt_status mt_fit_config_load(const char* path, mt_fit_config* cfg) {
  return guard([&] {
    require(path, "path");
    require(cfg, "cfg");
    *cfg = to_c(fit_config_from_json(jsonio::read_text(path), path));
  });
}

mt_status mt_fit(const mt_model* model, const double* target, size_t count, const mt_subop* op,
                 const mt_fit_config* cfg, mt_fit_result** out) {
  return guard([&] {
    require(model, "model");
    require(target, "target");
    require(out, "out");
    const FitConfig fc = cfg ? to_cpp(*cfg) : FitConfig{};
    const SubsamplingOperator sub = op ? op->op : SubsamplingOperator::identity(model->model->num_vertices());
    auto r = std::make_unique<mt_fit_result>();
    r->model = model->model;
    r->cfg = fc;
    r->result = fit(*model->model, points_from(target, count), sub, fc);
    *out = r.release();
  });
}

mt_status mt_fit_result_load(const mt_model* model, const char* path, const mt_fit_config* cfg, mt_fit_result** out) {
  return guard([&] {
    require(model, "model");
    require(path, "path");
    require(out, "out");
    auto r = std::make_unique<mt_fit_result>();
    r->model = model->model;
    r->cfg = cfg ? to_cpp(*cfg) : FitConfig{};
    r->cfg.validate();
    FitResult& f = r->result;
    f.params = fit_result_params(path);
    if (static_cast<int>(f.params.z.size()) != r->cfg.prior().code_dims() ||
        static_cast<int>(f.params.beta.size()) != model->model->num_betas)
      throw Error(ErrorCode::DimensionMismatch, std::string(path) + ": params do not match the model");
    f.fitted_mesh = posed_mesh(*model->model, f.params, r->cfg);
    f.joints = regress_joints(*model->model, f.fitted_mesh);
    f.terms = reg_terms(f.params, *model->model, r->cfg);
    *out = r.release();
  });
}

mt_status mt_fit_result_save(const mt_fit_result* result, const char* json_path, const char* obj_path) {
  return guard([&] {
    require(result, "result");
    require(json_path, "json_path");
    const std::string obj = obj_path ? obj_path : "";
    if (!obj.empty()) export_obj(TriMesh{result->result.fitted_mesh, result->model->faces}, obj);
    jsonio::write_text(json_path, fit_result_to_json(result->result, obj));
  });
}

mt_status mt_fit_result_terms(const mt_fit_result* result, mt_terms* out) {
  return guard([&] {
    require(result, "result");
    require(out, "out");
    const TermBreakdown& t = result->result.terms;
    *out = {t.data, t.z, t.beta, t.wrist, t.alpha, t.reg, t.total};
  });
}

void mt_fit_result_free(mt_fit_result* result) { delete result; }

mt_status mt_evaluate(const mt_fit_result* result, const mt_scene* scene, mt_report** out) {
  return guard([&] {
    require(result, "result");
    require(scene, "scene");
    require(out, "out");
    *out = new mt_report{evaluate_fit(result->result, scene->scene, result->cfg)};
  });
}

mt_status mt_report_values(const mt_report* report, mt_metrics* out) {
  return guard([&] {
    require(report, "report");
    require(out, "out");
    const MetricReport& r = report->report;
    *out = {r.mpjpe, r.mpve, r.mean_angular, r.pck, r.auc};
  });
}

mt_status mt_report_angular(const mt_report* report, double* out, size_t capacity, size_t* out_count) {
  return guard([&] {
    require(report, "report");
    const auto& a = report->report.per_joint_angular;
    emit(a.data(), a.size(), out, capacity, out_count);
  });
}

mt_status mt_report_save_json(const mt_report* report, const char* path) {
  return guard([&] {
    require(report, "report");
    require(path, "path");
    jsonio::write_text(path, report->report.to_json());
  });
}

mt_status mt_report_save_csv(const mt_report* report, const char* path) {
  return guard([&] {
    require(report, "report");
    require(path, "path");
    jsonio::write_text(path, report->report.angular_csv());
  });
}

mt_status mt_report_json(const mt_report* report, char* out, size_t capacity, size_t* out_len) {
  if (!report) return fail(MT_INVALID_ARGUMENT, "InvalidArgument: report is NULL");
  try {
    const std::string text = report->report.to_json();
    if (out_len) *out_len = text.size();
    if (!out) return MT_OK;
    if (capacity < text.size() + 1)
      return fail(MT_BUFFER_TOO_SMALL, "buffer holds " + std::to_string(capacity) + " bytes, need " +
                                           std::to_string(text.size() + 1));
    std::memcpy(out, text.c_str(), text.size() + 1);
    return MT_OK;
  } catch (const std::exception& e) {
    return fail(MT_INTERNAL, e.what());
  }
}

void mt_report_free(mt_report* report) { delete report; }

mt_status mt_run_config_create(mt_run_config** out) {
  return guard([&] {
    require(out, "out");
    *out = new mt_run_config{};
  });
}

mt_status mt_run_config_load(const char* path, mt_run_config** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new mt_run_config{run_config_from_json(jsonio::read_text(path), path)};
  });
}

mt_status mt_run_config_set_seed(mt_run_config* cfg, uint64_t seed) {
  return guard([&] {
    require(cfg, "cfg");
    cfg->cfg.seed = seed;
  });
}

mt_status mt_run_config_set_views(mt_run_config* cfg, int views) {
  return guard([&] {
    require(cfg, "cfg");
    if (views < 1) throw Error(ErrorCode::InvalidConfig, "views must be >= 1");
    cfg->cfg.scene.views = views;
  });
}

mt_status mt_run_config_set_sub(mt_run_config* cfg, int sub) {
  return guard([&] {
    require(cfg, "cfg");
    RunConfig next = cfg->cfg;
    next.sub = sub;
    next.validate();
    cfg->cfg = next;
  });
}

mt_status mt_run_config_set_resolution(mt_run_config* cfg, int resolution) {
  return guard([&] {
    require(cfg, "cfg");
    RunConfig next = cfg->cfg;
    next.pipeline.heatmaps.resolution = resolution;
    next.validate();
    cfg->cfg = next;
  });
}

mt_status mt_run_config_save(const mt_run_config* cfg, const char* path) {
  return guard([&] {
    require(cfg, "cfg");
    require(path, "path");
    jsonio::write_text(path, run_config_to_json(cfg->cfg));
  });
}

void mt_run_config_free(mt_run_config* cfg) { delete cfg; }

mt_status mt_pipeline_run(const mt_run_config* cfg, mt_report** out_report, mt_fit_result** out_fit) {
  return guard([&] {
    require(cfg, "cfg");
    const RunConfig& rc = cfg->cfg;
    rc.validate();
    auto model = std::make_shared<const BodyModel>(make_toy_model(0, rc.vertex_budget));
    const DecimateResult dec = decimate(TriMesh{model->template_verts, model->faces}, rc.sub);
    const Scene scene = gen_scene(*model, dec.op, rc.seed, rc.scene);
    PipelineConfig pc = rc.pipeline;
    pc.heatmaps.noise_seed = pc.heatmaps.noise_seed ? pc.heatmaps.noise_seed : rc.seed;
    PipelineResult pr = run_pipeline(*model, scene, pc);
    if (out_report) *out_report = new mt_report{pr.metrics};
    if (out_fit) *out_fit = new mt_fit_result{model, pc.fit, std::move(pr.fit)};
  });
}

}  // extern "C"
