// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "meshtri/io.hpp"
#include "support.hpp"

using namespace meshtri;

namespace {

const BodyModel& toy() {
  static const BodyModel m = make_toy_model(0, 1500);
  return m;
}

const SubsamplingOperator& sub54() {
  static const SubsamplingOperator op = decimate(TriMesh{toy().template_verts, toy().faces}, 54).op;
  return op;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("camera JSON round trip is exact") {
  const CameraCalib c = look_at_camera({1.3, 1.7, -3.1}, {0.1, 0.9, 0.2}, 1234.5, 900, 1100);
  const CameraCalib back = camera_from_json(camera_to_json(c));
  CHECK(back.intrinsics == c.intrinsics);
  CHECK(back.rotation == c.rotation);
  CHECK(back.translation == c.translation);
  CHECK(back.height == 900);
  CHECK(back.width == 1100);
}

TEST_CASE("camera files: single object and rig arrays") {
  meshtri::testing::TempDir dir("cam");
  const CameraCalib a = look_at_camera({0, 1, -4}, {0, 1, 0}, 1000, 1000, 1000);
  const CameraCalib b = look_at_camera({4, 1, 0}, {0, 1, 0}, 900, 800, 800);
  save_camera(a, dir.file("one.json"));
  CHECK(load_cameras(dir.file("one.json")).size() == 1);
  auto rig = nlohmann::json::array();
  rig.push_back(nlohmann::json::parse(camera_to_json(a)));
  rig.push_back(nlohmann::json::parse(camera_to_json(b)));
  std::ofstream(dir.file("rig.json")) << rig.dump();
  const auto cams = load_cameras(dir.file("rig.json"));
  REQUIRE(cams.size() == 2);
  CHECK(cams[1].rotation == b.rotation);
}

TEST_CASE("camera JSON rejects bad input") {
  auto j = nlohmann::json::parse(camera_to_json(look_at_camera({0, 0, -4}, {0, 0, 0}, 1000, 100, 100)));
  auto extra = j;
  extra["skew"] = 0.0;
  CHECK(code_of([&] { camera_from_json(extra.dump()); }) == ErrorCode::InvalidConfig);
  auto version = j;
  version["schema_version"] = 99;
  CHECK(code_of([&] { camera_from_json(version.dump()); }) == ErrorCode::InvalidConfig);
  auto bad_rot = j;
  bad_rot["rotation"] = {1, 0, 0, 0, 1, 0, 0, 0, -1};
  CHECK(code_of([&] { camera_from_json(bad_rot.dump()); }) != ErrorCode::InvalidArgument);
  CHECK(code_of([&] { camera_from_json("{not json"); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { load_cameras("/nonexistent/meshtri/cam.json"); }) == ErrorCode::IoError);
}

TEST_CASE("sub-sampling operator round trip and validation") {
  meshtri::testing::TempDir dir("subop");
  save_subop(sub54(), dir.file("op.json"));
  const SubsamplingOperator back = load_subop(dir.file("op.json"));
  CHECK(back.source_v == sub54().source_v);
  CHECK(back.kept_indices == sub54().kept_indices);
  std::ofstream(dir.file("bad.json")) << R"({"schema_version":1,"source_V":4,"kept_indices":[2,1]})";
  CHECK_THROWS_AS(load_subop(dir.file("bad.json")), Error);
}

TEST_CASE("point lists round trip exactly") {
  meshtri::testing::TempDir dir("pts");
  std::mt19937_64 rng(71);
  Points p(13, 3);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = meshtri::testing::uniform(rng, -3, 3);
  save_points(p, dir.file("p.json"));
  CHECK(load_points(dir.file("p.json")) == p);
  std::ofstream(dir.file("ragged.json")) << R"({"schema_version":1,"points":[[1,2,3],[4,5]]})";
  CHECK(code_of([&] { load_points(dir.file("ragged.json")); }) != ErrorCode::IoError);
}

TEST_CASE("fit config JSON: defaults, overrides, unknown fields") {
  const FitConfig d = fit_config_from_json(R"({"schema_version":1})");
  CHECK(d.learning_rate == 6e-2);
  CHECK(d.iterations == 500);
  CHECK(d.lambda_w == 6e-2);
  CHECK(d.lambda_z == 2e-6);
  CHECK(d.lambda_beta == 5e-6);
  CHECK(d.lambda_alpha == 5e-5);
  const FitConfig j = fit_config_from_json(R"({"schema_version":1,"iterations":20,"data_term":"joints"})");
  CHECK(j.iterations == 20);
  CHECK(j.data_term == DataTerm::Joints);
  const FitConfig back = fit_config_from_json(fit_config_to_json(j));
  CHECK(back.iterations == 20);
  CHECK(back.data_term == DataTerm::Joints);
  CHECK(code_of([] { fit_config_from_json(R"({"schema_version":1,"lr":1})"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { fit_config_from_json(R"({"iterations":1})"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { fit_config_from_json(R"({"schema_version":1,"iterations":0})"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { fit_config_from_json(R"({"schema_version":1,"data_term":"pixels"})"); }) ==
        ErrorCode::InvalidConfig);
}

TEST_CASE("fit params and result JSON") {
  std::mt19937_64 rng(72);
  FitParams p = FitParams::neutral(kPoseDims, kNumBetas);
  for (double& z : p.z) z = meshtri::testing::uniform(rng, -1, 1);
  p.t = {0.1, 0.2, 0.3};
  const FitParams back = fit_params_from_json(fit_params_to_json(p));
  CHECK(back.z == p.z);
  CHECK(back.rot6d == p.rot6d);
  CHECK(back.t == p.t);

  FitResult r;
  r.params = p;
  r.cost_trace = {3.0, 2.0, 1.0};
  r.terms.data = 0.5;
  meshtri::testing::TempDir dir("res");
  std::ofstream(dir.file("r.json")) << fit_result_to_json(r, "fitted.obj");
  const auto j = nlohmann::json::parse(slurp(dir.file("r.json")));
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["mesh_obj"] == "fitted.obj");
  CHECK(j["cost_trace"].size() == 3);
  CHECK(j["term_breakdown"]["data"] == 0.5);
  CHECK(fit_result_params(dir.file("r.json")).z == p.z);
}

TEST_CASE("run config JSON round trip and strictness") {
  RunConfig c;
  c.seed = 42;
  c.sub = 216;
  c.scene.views = 3;
  c.pipeline.heatmaps.resolution = 32;
  c.pipeline.fit.iterations = 77;
  const std::string text = run_config_to_json(c);
  const RunConfig back = run_config_from_json(text);
  CHECK(back.seed == 42);
  CHECK(back.sub == 216);
  CHECK(back.scene.views == 3);
  CHECK(back.pipeline.heatmaps.resolution == 32);
  CHECK(back.pipeline.fit.iterations == 77);
  CHECK(run_config_to_json(back) == text);

  auto j = nlohmann::json::parse(text);
  j["scene"]["colour"] = "red";
  CHECK(code_of([&] { run_config_from_json(j.dump()); }) == ErrorCode::InvalidConfig);
  j = nlohmann::json::parse(text);
  j["sub"] = 100;
  CHECK(code_of([&] { run_config_from_json(j.dump()); }) == ErrorCode::InvalidConfig);
  j = nlohmann::json::parse(text);
  j["heatmaps"]["resolution"] = 48;
  CHECK(code_of([&] { run_config_from_json(j.dump()); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("grid JSON round trip") {
  const VoxelGrid g = rotate_cuboid_yaw(make_cuboid({0.1, 0.95, -0.3}, 2.0, 16), 0.25);
  const VoxelGrid back = grid_from_json(grid_to_json(g));
  CHECK(back.resolution() == 16);
  CHECK(back.side() == 2.0);
  CHECK(back.yaw() == g.yaw());
  for (std::size_t v = 0; v < g.voxel_count(); v += 37) CHECK((back.coord(v) - g.coord(v)).norm() < 1e-12);
}

TEST_CASE("scene bundle round trip") {
  meshtri::testing::TempDir dir("bundle");
  const Scene s = gen_scene(toy(), sub54(), 73);
  HeatmapOptions opts;
  opts.resolution = 16;
  const Volume h = render_scene_heatmaps(s, opts);
  save_scene_bundle(dir.path().string(), toy(), s, &h);
  for (const char* f : {"cameras/cam_00.json", "cameras/cam_03.json", "model.body", "gt.json", "grid.json",
                        "heatmaps.bin", "heatmaps.bin.json"})
    CHECK(std::filesystem::exists(dir.path() / f));
  const SceneBundle b = load_scene_bundle(dir.path().string());
  CHECK(b.model.same_data(toy()));
  CHECK(b.scene.seed == 73);
  CHECK(b.scene.gt_mesh == s.gt_mesh);
  CHECK(b.scene.gt_sub == s.gt_sub);
  CHECK(b.scene.visibility == s.visibility);
  CHECK(b.scene.subop.kept_indices == s.subop.kept_indices);
  REQUIRE(b.scene.cameras.size() == 4);
  CHECK(b.scene.cameras[2].rotation == s.cameras[2].rotation);
  CHECK((b.scene.grid.center() - s.grid.center()).norm() == 0.0);
  CHECK(load_volume((dir.path() / "heatmaps.bin").string()).channels == 54);
}
