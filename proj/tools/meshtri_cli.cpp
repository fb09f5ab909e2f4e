// SPDX-License-Identifier: Apache-2.0
//
// meshtri command-line driver. Talks to the library only through the C API.
#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "meshtri/meshtri.h"

namespace {

namespace fs = std::filesystem;

// Raised when a C call fails; main turns it into exit code 1.
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(mt_status s) {
  if (s != MT_OK) throw RuntimeFailure(mt_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Model = std::unique_ptr<mt_model, Deleter<mt_model, mt_model_free>>;
using Mesh = std::unique_ptr<mt_mesh, Deleter<mt_mesh, mt_mesh_free>>;
using Subop = std::unique_ptr<mt_subop, Deleter<mt_subop, mt_subop_free>>;
using Cameras = std::unique_ptr<mt_cameras, Deleter<mt_cameras, mt_cameras_free>>;
using Scene = std::unique_ptr<mt_scene, Deleter<mt_scene, mt_scene_free>>;
using Vol = std::unique_ptr<mt_volume, Deleter<mt_volume, mt_volume_free>>;
using FitResult = std::unique_ptr<mt_fit_result, Deleter<mt_fit_result, mt_fit_result_free>>;
using Report = std::unique_ptr<mt_report, Deleter<mt_report, mt_report_free>>;
using RunConfig = std::unique_ptr<mt_run_config, Deleter<mt_run_config, mt_run_config_free>>;

template <class H, class Fn>
H make(Fn&& fn) {
  typename H::pointer p = nullptr;
  check(fn(&p));
  return H(p);
}

Model load_model(const std::string& path) {
  return make<Model>([&](mt_model** o) { return mt_model_load(path.c_str(), o); });
}

void write_file(const std::string& path, const std::string& text) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw RuntimeFailure("cannot write " + path);
  const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
  if (std::fclose(f) != 0 || !ok) throw RuntimeFailure("write failed for " + path);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<double> decoded_points(const mt_volume* vol) {
  std::size_t n = 0;
  check(mt_volume_decode(vol, nullptr, 0, &n));
  std::vector<double> pts(3 * n);
  check(mt_volume_decode(vol, pts.data(), n, &n));
  return pts;
}

mt_fit_config fit_config(const std::string& path) {
  mt_fit_config c;
  mt_fit_config_default(&c);
  if (!path.empty()) check(mt_fit_config_load(path.c_str(), &c));
  return c;
}

// --seeds "a..b" (inclusive) or a single number.
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  const auto dots = s.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      const auto v = std::stoull(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return {v};
    }
    const auto a = std::stoull(s.substr(0, dots), &used);
    if (used != dots) throw std::invalid_argument(s);
    const std::string rest = s.substr(dots + 2);
    const auto b = std::stoull(rest, &used);
    if (used != rest.size() || b < a) throw std::invalid_argument(s);
    std::vector<std::uint64_t> out;
    for (auto v = a; v <= b; ++v) out.push_back(v);
    return out;
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("--seeds", "expected a..b with a <= b, got '" + s + "'");
  }
}

unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MESHTRI_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, jobs));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volumetric multi-view body mesh triangulation and fitting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mt_version()));

  // model make-toy
  auto* model_cmd = app.add_subcommand("model", "Body model utilities");
  model_cmd->require_subcommand(1);
  auto* toy = model_cmd->add_subcommand("make-toy", "Write the procedural toy body model");
  std::string toy_out, toy_obj;
  std::uint64_t toy_seed = 0;
  int toy_budget = 1500;
  toy->add_option("--out", toy_out, "Model path (JSON header; blob at <out>.bin)")->required();
  toy->add_option("--seed", toy_seed, "Model seed");
  toy->add_option("--vertices", toy_budget, "Vertex budget")->check(CLI::Range(100, 200000));
  toy->add_option("--obj", toy_obj, "Also export the template as OBJ");

  // gen-scene
  auto* gen = app.add_subcommand("gen-scene", "Generate a seeded synthetic scene bundle");
  std::string gen_model, gen_out;
  std::uint64_t gen_seed = 0;
  int gen_sub = 108;
  mt_scene_config scfg;
  mt_scene_config_default(&scfg);
  gen->add_option("--out", gen_out, "Bundle directory")->required();
  gen->add_option("--seed", gen_seed, "Scene seed");
  gen->add_option("--model", gen_model, "Model path (default: toy model)");
  gen->add_option("--sub", gen_sub, "Sub-vertex preset")->check(CLI::IsMember({431, 216, 108, 54}));
  gen->add_option("--views", scfg.views, "Number of cameras")->check(CLI::PositiveNumber);
  gen->add_option("--pose-magnitude", scfg.pose_magnitude, "Half-range of joint angles (rad)");
  gen->add_option("--shape-magnitude", scfg.shape_magnitude, "Half-range of shape coefficients");
  gen->add_option("--camera-radius", scfg.camera_radius, "Camera ring radius (m)");

  // render-heatmaps
  auto* render = app.add_subcommand("render-heatmaps", "Render Gaussian heatmaps of a scene's sub-vertices");
  std::string render_scene, render_out, render_decode;
  mt_heatmap_options hopt;
  mt_heatmap_options_default(&hopt);
  render->add_option("--scene", render_scene, "Bundle directory")->required();
  render->add_option("--heatmap-res,--res", hopt.resolution, "Grid resolution L")->check(CLI::IsMember({16, 32, 64}));
  render->add_option("--sigma", hopt.sigma_pitch, "Gaussian width in voxel pitches");
  render->add_option("--noise", hopt.logit_noise, "Logit noise standard deviation");
  render->add_option("--seed", hopt.noise_seed, "Noise seed");
  render->add_option("--out", render_out, "Heatmap blob (default: <scene>/heatmaps.bin)");
  render->add_option("--decode", render_decode, "Write soft-argmax decoded sub-vertices here");

  // triangulate
  auto* tri = app.add_subcommand("triangulate", "Unproject and aggregate synthetic feature maps");
  std::string tri_scene, tri_out, tri_conf;
  int tri_channels = 4, tri_res = 16;
  tri->add_option("--scene", tri_scene, "Bundle directory")->required();
  tri->add_option("--channels", tri_channels, "Feature channels")->check(CLI::PositiveNumber);
  tri->add_option("--res", tri_res, "Grid resolution")->check(CLI::Range(2, 128));
  tri->add_option("--out", tri_out, "Aggregated volume blob");
  tri->add_option("--confidence", tri_conf, "Per-view confidence at the cuboid center (JSON)");

  // fit
  auto* fitc = app.add_subcommand("fit", "Fit the body model to target sub-vertices");
  std::string fit_model, fit_target, fit_subop, fit_cfg, fit_out, fit_obj, fit_heatmaps;
  fitc->add_option("--model", fit_model, "Model path")->required();
  auto* target_opt = fitc->add_option("--target", fit_target, "Target points JSON");
  auto* heat_opt = fitc->add_option("--heatmaps", fit_heatmaps, "Decode targets from a heatmap blob");
  target_opt->excludes(heat_opt);
  fitc->add_option("--subop", fit_subop, "Sub-sampling operator JSON (default: identity)");
  fitc->add_option("--config", fit_cfg, "Fit configuration JSON");
  std::string fit_term;
  fitc->add_option("--data-term", fit_term, "Override the data term")
      ->check(CLI::IsMember({"vertices", "joints"}));
  fitc->add_option("--out", fit_out, "Result JSON")->required();
  fitc->add_option("--obj", fit_obj, "Fitted mesh OBJ (default: <out>.obj)");

  // eval
  auto* evalc = app.add_subcommand("eval", "Evaluate a fit result against a scene's ground truth");
  std::string eval_scene, eval_result, eval_cfg, eval_out, eval_csv;
  evalc->add_option("--scene", eval_scene, "Bundle directory")->required();
  evalc->add_option("--result", eval_result, "Fit result JSON")->required();
  evalc->add_option("--config", eval_cfg, "Fit configuration used for the result");
  evalc->add_option("--out", eval_out, "MetricReport JSON (default: stdout)");
  evalc->add_option("--csv", eval_csv, "Per-joint angular rows");

  // visibility
  auto* visc = app.add_subcommand("visibility", "Per-vertex visibility of a mesh from cameras");
  std::string vis_mesh, vis_model, vis_cams, vis_out;
  int vis_cam = -1;
  bool vis_brute = false;
  auto* mesh_opt = visc->add_option("--mesh", vis_mesh, "Mesh OBJ");
  auto* vmodel_opt = visc->add_option("--model", vis_model, "Use a model's template mesh");
  mesh_opt->excludes(vmodel_opt);
  visc->add_option("--cameras", vis_cams, "Camera JSON (single or rig)")->required();
  visc->add_option("--camera", vis_cam, "Only this camera index");
  visc->add_flag("--brute-force", vis_brute, "Use the O(V*F) reference");
  visc->add_option("--out", vis_out, "Output JSON (default: stdout)");

  // decimate
  auto* decc = app.add_subcommand("decimate", "Quadric edge-collapse decimation");
  std::string dec_mesh, dec_model, dec_subop, dec_obj;
  int dec_n = 108;
  auto* dmesh_opt = decc->add_option("--mesh", dec_mesh, "Mesh OBJ");
  auto* dmodel_opt = decc->add_option("--model", dec_model, "Use a model's template mesh");
  dmesh_opt->excludes(dmodel_opt);
  decc->add_option("--n", dec_n, "Target vertex count")->check(CLI::PositiveNumber);
  decc->add_option("--out-subop", dec_subop, "Sub-sampling operator JSON");
  decc->add_option("--out-obj", dec_obj, "Decimated mesh OBJ");

  // memory-report
  auto* mem = app.add_subcommand("memory-report", "Storage of an L^3 x N float32 heatmap");
  int mem_res = 64, mem_n = 108;
  mem->add_option("--res", mem_res, "Grid resolution L")->check(CLI::PositiveNumber);
  mem->add_option("--n", mem_n, "Vertex count N")->check(CLI::PositiveNumber);

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Scene, heatmaps, decode, triangulate, fit and eval");
  std::string pipe_cfg, pipe_seeds, pipe_out = ".";
  std::uint64_t pipe_seed = 7;
  int pipe_views = 0, pipe_sub = 0, pipe_res = 0;
  pipe->add_option("--config", pipe_cfg, "Run configuration JSON");
  auto* seed_opt = pipe->add_option("--seed", pipe_seed, "Scene seed");
  auto* seeds_opt = pipe->add_option("--seeds", pipe_seeds, "Seed range a..b (parallel, MESHTRI_THREADS caps workers)");
  seed_opt->excludes(seeds_opt);
  pipe->add_option("--views", pipe_views, "Number of cameras")->check(CLI::PositiveNumber);
  pipe->add_option("--sub", pipe_sub, "Sub-vertex preset")->check(CLI::IsMember({431, 216, 108, 54}));
  pipe->add_option("--res,--heatmap-res", pipe_res, "Heatmap resolution")->check(CLI::IsMember({16, 32, 64}));
  pipe->add_option("--out", pipe_out, "Output directory for report_seed<S>.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (toy->parsed()) {
      auto m = make<Model>([&](mt_model** o) { return mt_model_make_toy(toy_seed, toy_budget, o); });
      check(mt_model_save(m.get(), toy_out.c_str()));
      if (!toy_obj.empty()) {
        auto mesh = make<Mesh>([&](mt_mesh** o) { return mt_model_template_mesh(m.get(), o); });
        check(mt_mesh_save_obj(mesh.get(), toy_obj.c_str()));
      }
      std::printf("wrote %s (%d vertices)\n", toy_out.c_str(), mt_model_num_vertices(m.get()));
    } else if (gen->parsed()) {
      Model m = gen_model.empty() ? make<Model>([](mt_model** o) { return mt_model_make_toy(0, 1500, o); })
                                  : load_model(gen_model);
      auto tmpl = make<Mesh>([&](mt_mesh** o) { return mt_model_template_mesh(m.get(), o); });
      auto op = make<Subop>([&](mt_subop** o) { return mt_decimate(tmpl.get(), gen_sub, nullptr, o); });
      auto s = make<Scene>([&](mt_scene** o) { return mt_scene_generate(m.get(), op.get(), gen_seed, &scfg, o); });
      check(mt_scene_save_bundle(s.get(), m.get(), gen_out.c_str(), nullptr));
      check(mt_subop_save(op.get(), (fs::path(gen_out) / "subop.json").string().c_str()));
      std::size_t n = 0;
      check(mt_scene_gt_sub(s.get(), nullptr, 0, &n));
      std::vector<double> pts(3 * n);
      check(mt_scene_gt_sub(s.get(), pts.data(), n, &n));
      check(mt_points_save((fs::path(gen_out) / "target.json").string().c_str(), pts.data(), n));
      std::printf("wrote scene %" PRIu64 " to %s\n", gen_seed, gen_out.c_str());
    } else if (render->parsed()) {
      auto s = make<Scene>([&](mt_scene** o) { return mt_scene_load_bundle(render_scene.c_str(), o, nullptr); });
      auto h = make<Vol>([&](mt_volume** o) { return mt_scene_render_heatmaps(s.get(), &hopt, o); });
      const std::string out = render_out.empty() ? (fs::path(render_scene) / "heatmaps.bin").string() : render_out;
      check(mt_volume_save(h.get(), out.c_str()));
      if (!render_decode.empty()) {
        const auto pts = decoded_points(h.get());
        check(mt_points_save(render_decode.c_str(), pts.data(), pts.size() / 3));
      }
      std::printf("wrote %s (%d channels, L=%d)\n", out.c_str(), mt_volume_channels(h.get()),
                  mt_volume_resolution(h.get()));
    } else if (tri->parsed()) {
      auto s = make<Scene>([&](mt_scene** o) { return mt_scene_load_bundle(tri_scene.c_str(), o, nullptr); });
      std::size_t views = 0;
      mt_volume* agg = nullptr;
      check(mt_scene_triangulate(s.get(), tri_channels, tri_res, nullptr, nullptr, 0, &views));
      std::vector<double> conf(views);
      check(mt_scene_triangulate(s.get(), tri_channels, tri_res, &agg, conf.data(), conf.size(), &views));
      Vol hold(agg);
      if (!tri_out.empty()) check(mt_volume_save(agg, tri_out.c_str()));
      std::string text = "{\n  \"schema_version\": 1,\n  \"pelvis_confidence\": [";
      for (std::size_t c = 0; c < conf.size(); ++c) text += (c ? ", " : "") + fmt("%.6f", conf[c]);
      text += "]\n}\n";
      if (tri_conf.empty())
        std::fputs(text.c_str(), stdout);
      else
        write_file(tri_conf, text);
    } else if (fitc->parsed()) {
      if (fit_target.empty() && fit_heatmaps.empty()) throw CLI::RequiredError("--target or --heatmaps");
      auto m = load_model(fit_model);
      std::vector<double> pts;
      if (!fit_heatmaps.empty()) {
        auto h = make<Vol>([&](mt_volume** o) { return mt_volume_load(fit_heatmaps.c_str(), o); });
        pts = decoded_points(h.get());
      } else {
        std::size_t n = 0;
        check(mt_points_load(fit_target.c_str(), nullptr, 0, &n));
        pts.resize(3 * n);
        check(mt_points_load(fit_target.c_str(), pts.data(), n, &n));
      }
      Subop op;
      if (!fit_subop.empty()) op = make<Subop>([&](mt_subop** o) { return mt_subop_load(fit_subop.c_str(), o); });
      mt_fit_config cfg = fit_config(fit_cfg);
      if (!fit_term.empty()) cfg.joints_data_term = fit_term == "joints";
      auto r = make<FitResult>(
          [&](mt_fit_result** o) { return mt_fit(m.get(), pts.data(), pts.size() / 3, op.get(), &cfg, o); });
      const std::string obj = fit_obj.empty() ? fit_out + ".obj" : fit_obj;
      check(mt_fit_result_save(r.get(), fit_out.c_str(), obj.c_str()));
      mt_terms t;
      check(mt_fit_result_terms(r.get(), &t));
      std::printf("E_data %.9g  E_reg %.9g  E_fit %.9g\n", t.data, t.reg, t.total);
    } else if (evalc->parsed()) {
      mt_model* raw_model = nullptr;
      auto s = make<Scene>([&](mt_scene** o) { return mt_scene_load_bundle(eval_scene.c_str(), o, &raw_model); });
      Model m(raw_model);
      const mt_fit_config cfg = fit_config(eval_cfg);
      auto r = make<FitResult>(
          [&](mt_fit_result** o) { return mt_fit_result_load(m.get(), eval_result.c_str(), &cfg, o); });
      auto rep = make<Report>([&](mt_report** o) { return mt_evaluate(r.get(), s.get(), o); });
      if (!eval_csv.empty()) check(mt_report_save_csv(rep.get(), eval_csv.c_str()));
      if (eval_out.empty()) {
        std::size_t len = 0;
        check(mt_report_json(rep.get(), nullptr, 0, &len));
        std::string text(len + 1, '\0');
        check(mt_report_json(rep.get(), text.data(), text.size(), &len));
        std::fputs(text.c_str(), stdout);
      } else {
        check(mt_report_save_json(rep.get(), eval_out.c_str()));
      }
    } else if (visc->parsed()) {
      if (vis_mesh.empty() && vis_model.empty()) throw CLI::RequiredError("--mesh or --model");
      Mesh mesh;
      if (!vis_mesh.empty()) {
        mesh = make<Mesh>([&](mt_mesh** o) { return mt_mesh_load_obj(vis_mesh.c_str(), o); });
      } else {
        auto m = load_model(vis_model);
        mesh = make<Mesh>([&](mt_mesh** o) { return mt_model_template_mesh(m.get(), o); });
      }
      auto cams = make<Cameras>([&](mt_cameras** o) { return mt_cameras_load(vis_cams.c_str(), o); });
      const int count = mt_cameras_count(cams.get());
      if (vis_cam >= count) throw CLI::ValidationError("--camera", "index out of range");
      std::string text = "{\n  \"schema_version\": 1,\n  \"visibility\": [\n";
      bool first = true;
      for (int c = 0; c < count; ++c) {
        if (vis_cam >= 0 && c != vis_cam) continue;
        std::vector<std::uint8_t> vis(static_cast<std::size_t>(mt_mesh_num_vertices(mesh.get())));
        std::size_t n = 0;
        check(mt_visibility(mesh.get(), cams.get(), c, vis_brute ? 1 : 0, vis.data(), vis.size(), &n));
        text += first ? "    [" : ",\n    [";
        first = false;
        for (std::size_t v = 0; v < n; ++v) text += (v ? ", " : "") + std::to_string(vis[v]);
        text += "]";
      }
      text += "\n  ]\n}\n";
      if (vis_out.empty())
        std::fputs(text.c_str(), stdout);
      else
        write_file(vis_out, text);
    } else if (decc->parsed()) {
      if (dec_mesh.empty() && dec_model.empty()) throw CLI::RequiredError("--mesh or --model");
      Mesh mesh;
      if (!dec_mesh.empty()) {
        mesh = make<Mesh>([&](mt_mesh** o) { return mt_mesh_load_obj(dec_mesh.c_str(), o); });
      } else {
        auto m = load_model(dec_model);
        mesh = make<Mesh>([&](mt_mesh** o) { return mt_model_template_mesh(m.get(), o); });
      }
      mt_mesh* out_mesh = nullptr;
      mt_subop* out_op = nullptr;
      check(mt_decimate(mesh.get(), dec_n, &out_mesh, &out_op));
      Mesh hold_mesh(out_mesh);
      Subop hold_op(out_op);
      if (!dec_subop.empty()) check(mt_subop_save(out_op, dec_subop.c_str()));
      if (!dec_obj.empty()) check(mt_mesh_save_obj(out_mesh, dec_obj.c_str()));
      std::printf("%d -> %d vertices, %d faces\n", mt_mesh_num_vertices(mesh.get()), mt_mesh_num_vertices(out_mesh),
                  mt_mesh_num_faces(out_mesh));
    } else if (mem->parsed()) {
      double mb = 0.0;
      check(mt_heatmap_megabytes(mem_res, mem_n, &mb));
      std::printf("%.1f MB\n", mb);
    } else if (pipe->parsed()) {
      RunConfig base = pipe_cfg.empty()
                           ? make<RunConfig>([](mt_run_config** o) { return mt_run_config_create(o); })
                           : make<RunConfig>([&](mt_run_config** o) { return mt_run_config_load(pipe_cfg.c_str(), o); });
      if (pipe_views) check(mt_run_config_set_views(base.get(), pipe_views));
      if (pipe_sub) check(mt_run_config_set_sub(base.get(), pipe_sub));
      if (pipe_res) check(mt_run_config_set_resolution(base.get(), pipe_res));
      const std::vector<std::uint64_t> seeds =
          pipe_seeds.empty() ? std::vector<std::uint64_t>{pipe_seed} : parse_seeds(pipe_seeds);
      std::error_code ec;
      fs::create_directories(pipe_out, ec);
      if (ec) throw RuntimeFailure("cannot create " + pipe_out + ": " + ec.message());
      const std::string cfg_path = (fs::path(pipe_out) / "run_config.json").string();
      check(mt_run_config_save(base.get(), cfg_path.c_str()));

      std::atomic<std::size_t> next{0};
      std::mutex mu;
      std::vector<std::string> errors;
      auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
          const std::uint64_t seed = seeds[i];
          const std::string report = (fs::path(pipe_out) / ("report_seed" + std::to_string(seed) + ".json")).string();
          mt_run_config* cfg = nullptr;
          mt_report* rep = nullptr;
          mt_status st = mt_run_config_load(cfg_path.c_str(), &cfg);
          if (st == MT_OK) st = mt_run_config_set_seed(cfg, seed);
          if (st == MT_OK) st = mt_pipeline_run(cfg, &rep, nullptr);
          if (st == MT_OK) st = mt_report_save_json(rep, report.c_str());
          if (st != MT_OK) {
            const std::lock_guard<std::mutex> lock(mu);
            errors.push_back("seed " + std::to_string(seed) + ": " + mt_last_error());
          } else {
            mt_metrics v;
            mt_report_values(rep, &v);
            const std::lock_guard<std::mutex> lock(mu);
            std::printf("seed %" PRIu64 ": MPJPE %.3f mm  MPVE %.3f mm  angular %.3f deg -> %s\n", seed, v.mpjpe_mm,
                        v.mpve_mm, v.mean_angular_deg, report.c_str());
          }
          mt_report_free(rep);
          mt_run_config_free(cfg);
        }
      };
      std::vector<std::thread> pool;
      const unsigned workers = worker_count(seeds.size());
      for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();
      if (!errors.empty()) {
        std::sort(errors.begin(), errors.end());
        std::string all;
        for (const auto& e : errors) all += (all.empty() ? "" : "\n") + e;
        throw RuntimeFailure(all);
      }
    }
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "usage error: %s\n%s", e.what(), app.help().c_str());
    return 2;
  } catch (const RuntimeFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
