// SPDX-License-Identifier: Apache-2.0
#include <fstream>

#include "doctest.h"
#include "meshtri/body_model.hpp"
#include "meshtri/toy_layout.hpp"
#include "support.hpp"

using namespace meshtri;
using meshtri::testing::uniform;

namespace {

const BodyModel& toy() {
  static const BodyModel m = make_toy_model(0, 1500);
  return m;
}

std::vector<double> random_pose(std::mt19937_64& rng, double mag) {
  std::vector<double> p(kPoseDims);
  for (double& v : p) v = uniform(rng, -mag, mag);
  return p;
}

std::vector<double> random_beta(std::mt19937_64& rng) {
  std::vector<double> b(kNumBetas);
  for (double& v : b) v = uniform(rng, -1, 1);
  return b;
}

// Two joints on the x axis; vertices 0,1 ride the root, 2,3 the child.
BodyModel two_bone_chain() {
  BodyModel m;
  m.template_verts.resize(4, 3);
  m.template_verts << 0, 0.1, 0, 0.5, 0.1, 0, 1.5, 0.1, 0, 2.0, -0.2, 0.3;
  m.faces.resize(2, 3);
  m.faces << 0, 1, 2, 1, 3, 2;
  m.num_betas = 0;
  m.skin_weights = RowMatrix::Zero(4, 2);
  m.skin_weights(0, 0) = m.skin_weights(1, 0) = 1.0;
  m.skin_weights(2, 1) = m.skin_weights(3, 1) = 1.0;
  m.joint_regressor = RowMatrix::Zero(kNumRegressedJoints, 4);
  for (int r = 0; r < kNumRegressedJoints; ++r) m.joint_regressor(r, r % 4) = 1.0;
  // Root at x = 0, child at x = 1.
  m.rest_joint_regressor = RowMatrix::Zero(2, 4);
  m.rest_joint_regressor(0, 0) = 1.0;
  m.rest_joint_regressor(1, 1) = 0.5;
  m.rest_joint_regressor(1, 2) = 0.5;
  m.parents = {-1, 0};
  m.wrist_joints = {1, 1};
  m.finalize();
  return m;
}

}  // namespace

TEST_CASE("rot6d_to_matrix examples") {
  const std::array<double, 6> a{1, 0, 0, 0, 1, 0}, b{2, 0, 0, 0, 3, 0}, c{1, 0, 0, 1, 1, 0};
  CHECK(rot6d_to_matrix(a).matrix() == Eigen::Matrix3d::Identity());
  CHECK(rot6d_to_matrix(b).matrix().isApprox(Eigen::Matrix3d::Identity(), 1e-15));
  CHECK(rot6d_to_matrix(c).matrix().isApprox(Eigen::Matrix3d::Identity(), 1e-15));
}

TEST_CASE("rot6d_to_matrix rejects degenerate input") {
  const std::array<double, 6> zero{0, 0, 0, 0, 1, 0}, parallel{1, 2, 3, 2, 4, 6};
  for (const auto& r : {zero, parallel}) {
    try {
      rot6d_to_matrix(r);
      FAIL("expected DegenerateInput");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateInput);
    }
  }
}

TEST_CASE("rot6d_to_matrix yields proper rotations and is invariant to scale and shear of a1") {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 10000; ++n) {
    std::array<double, 6> r;
    for (double& v : r) v = uniform(rng, -2, 2);
    Eigen::Matrix3d m;
    try {
      m = rot6d_to_matrix(r).matrix();
    } catch (const Error&) {
      continue;
    }
    CHECK(Rotation::is_valid(m));
    if (n % 10) continue;
    const double s = uniform(rng, 0.1, 10), k = uniform(rng, -3, 3);
    std::array<double, 6> q = r;
    for (int d = 0; d < 3; ++d) {
      q[d] = s * r[d];
      q[3 + d] = r[3 + d] + k * r[d];
    }
    CHECK((rot6d_to_matrix(q).matrix() - m).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("matrix_to_rot6d inverts rot6d_to_matrix") {
  std::mt19937_64 rng(12);
  for (int n = 0; n < 100; ++n) {
    const Rotation r = meshtri::testing::random_rotation(rng);
    CHECK(rot6d_to_matrix(matrix_to_rot6d(r)).matrix().isApprox(r.matrix(), 1e-12));
  }
}

TEST_CASE("axis-angle examples and round trip") {
  CHECK(axis_angle_to_matrix({0, 0, 0}).matrix() == Eigen::Matrix3d::Identity());
  const Eigen::Matrix3d pi_x = axis_angle_to_matrix({M_PI, 0, 0}).matrix();
  CHECK((pi_x - Eigen::Vector3d(1, -1, -1).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() < 1e-15);
  std::mt19937_64 rng(13);
  for (int n = 0; n < 1000; ++n) {
    const Eigen::Vector3d aa = meshtri::testing::random_unit(rng) * uniform(rng, 1e-6, M_PI - 1e-6);
    CHECK((matrix_to_axis_angle(axis_angle_to_matrix(aa)) - aa).norm() < 1e-9);
  }
  const double angle = matrix_to_axis_angle(axis_angle_to_matrix({0, 3.0, 0})).norm();
  CHECK(angle <= M_PI);
}

TEST_CASE("Rotation validates orthonormality and determinant") {
  CHECK_THROWS_AS(Rotation(Eigen::Matrix3d::Identity() * 2.0), Error);
  CHECK_THROWS_AS(Rotation(Eigen::Vector3d(1, 1, -1).asDiagonal().toDenseMatrix()), Error);
}

TEST_CASE("toy model construction contract") {
  const BodyModel& m = toy();
  CHECK(m.num_joints() == kNumJoints);
  CHECK(m.num_betas == kNumBetas);
  CHECK(std::abs(m.num_vertices() - 1500) <= 150);
  for (Eigen::Index v = 0; v < m.skin_weights.rows(); ++v) {
    CHECK(std::abs(m.skin_weights.row(v).sum() - 1.0) < 1e-9);
    CHECK(m.skin_weights.row(v).minCoeff() >= 0.0);
  }
  for (Eigen::Index r = 0; r < m.joint_regressor.rows(); ++r)
    CHECK(std::abs(m.joint_regressor.row(r).sum() - 1.0) < 1e-9);
  CHECK(m.hinge_dofs.size() == 4);
  CHECK(m.parents[0] == -1);
  for (int j = 1; j < m.num_joints(); ++j) CHECK(m.parents[j] < j);
  for (int budget : {50, 300, 3000}) {
    const BodyModel b = make_toy_model(0, budget);
    CHECK(std::abs(b.num_vertices() - budget) <= budget / 10);
  }
}

TEST_CASE("toy model is deterministic per seed") {
  CHECK(make_toy_model(4, 800).same_data(make_toy_model(4, 800)));
  CHECK_FALSE(make_toy_model(4, 800).same_data(make_toy_model(5, 800)));
}

TEST_CASE("toy rest joints match the designed skeleton") {
  const BodyModel& m = toy();
  const Points j = rest_joints(m, std::vector<double>(kNumBetas, 0.0));
  const ToyLayout lay = toy_layout(0);
  for (int k = 0; k < kNumJoints; ++k) CHECK((j.row(k).transpose() - lay.joints[k]).norm() < 0.02);
}

TEST_CASE("lbs_forward at rest returns the template") {
  const BodyModel& m = toy();
  const std::vector<double> pose(kPoseDims, 0.0), beta(kNumBetas, 0.0);
  const Points rest = lbs_forward(m, pose, Rotation(), beta, Eigen::Vector3d::Zero());
  CHECK((rest - m.template_verts).cwiseAbs().maxCoeff() < 1e-12);
  const Points moved = lbs_forward(m, pose, Rotation(), beta, Eigen::Vector3d(0, 0, 1));
  for (Eigen::Index v = 0; v < moved.rows(); ++v)
    CHECK((moved.row(v) - m.template_verts.row(v) - Eigen::RowVector3d(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("lbs_forward rejects wrong dimensions") {
  const BodyModel& m = toy();
  try {
    lbs_forward(m, std::vector<double>(5, 0.0), Rotation(), std::vector<double>(kNumBetas, 0.0), {0, 0, 0});
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
  CHECK_THROWS_AS(lbs_forward(m, std::vector<double>(kPoseDims, 0.0), Rotation(), std::vector<double>(3, 0.0), {0, 0, 0}),
                  Error);
}

TEST_CASE("two-bone chain: child rotation is rigid about the joint") {
  const BodyModel m = two_bone_chain();
  const std::vector<double> pose{M_PI / 2, 0, 0};
  const Points out = lbs_forward(m, pose, Rotation(), {}, Eigen::Vector3d::Zero());
  const Eigen::Vector3d joint(1.0, 0.1, 0.0);  // child joint: mean of vertices 1 and 2
  const Eigen::Matrix3d rx = axis_angle_to_matrix({M_PI / 2, 0, 0}).matrix();
  for (int v = 0; v < 2; ++v) CHECK((out.row(v) - m.template_verts.row(v)).norm() < 1e-15);
  for (int v = 2; v < 4; ++v) {
    const Eigen::Vector3d expect = rx * (m.template_verts.row(v).transpose() - joint) + joint;
    CHECK((out.row(v).transpose() - expect).norm() < 1e-12);
  }
}

TEST_CASE("lbs_forward is equivariant under a global rigid transform at the root") {
  const BodyModel& m = toy();
  std::mt19937_64 rng(14);
  for (int n = 0; n < 5; ++n) {
    const auto pose = random_pose(rng, 0.4);
    const auto beta = random_beta(rng);
    const Rotation r = meshtri::testing::random_rotation(rng), q = meshtri::testing::random_rotation(rng);
    const Eigen::Vector3d t0(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    const Eigen::Vector3d t(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    const Points base = lbs_forward(m, pose, r, beta, t0);
    const Points moved = lbs_forward(m, pose, q * r, beta, q.matrix() * t0 + t);
    // Rotating about the origin moves the root joint; compensate with the
    // root's rest position, which the model rotates about.
    const Eigen::Vector3d j0 = rest_joints(m, beta).row(0).transpose();
    const Eigen::Vector3d shift = q.matrix() * j0 - j0;
    for (Eigen::Index v = 0; v < base.rows(); ++v) {
      const Eigen::Vector3d expect = q.matrix() * base.row(v).transpose() + t - shift;
      CHECK((moved.row(v).transpose() - expect).norm() < 1e-9);
    }
  }
}

TEST_CASE("lbs gradient from the tape matches central differences") {
  const BodyModel& m = toy();
  std::mt19937_64 rng(15);
  const int np = kPoseDims + 6 + kNumBetas + 3;
  std::vector<int> all(static_cast<std::size_t>(m.num_vertices()));
  for (int v = 0; v < m.num_vertices(); ++v) all[static_cast<std::size_t>(v)] = v;
  std::vector<double> w(all.size() * 3);
  for (double& x : w) x = uniform(rng, -1, 1);

  auto eval = [&](const auto* x, auto* verts) {
    using T = std::remove_cv_t<std::remove_pointer_t<decltype(x)>>;
    const auto skel = lbs::pose_skeleton(m, x, rot::from_6d(x + kPoseDims), x + kPoseDims + 6);
    lbs::skin_vertices(m, skel, x + kPoseDims + 6, x + kPoseDims + 6 + kNumBetas, std::span<const int>(all), verts);
    T s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * verts[i];
    return s;
  };
  auto f = [&](const std::vector<double>& x) {
    std::vector<double> verts(w.size());
    return eval(x.data(), verts.data());
  };
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<double> x;
    for (double v : random_pose(rng, 0.5)) x.push_back(v);
    const auto r6 = matrix_to_rot6d(meshtri::testing::random_rotation(rng));
    x.insert(x.end(), r6.begin(), r6.end());
    for (double v : random_beta(rng)) x.push_back(v);
    for (int d = 0; d < 3; ++d) x.push_back(uniform(rng, -1, 1));
    REQUIRE(static_cast<int>(x.size()) == np);

    ad::Tape tape;
    std::vector<ad::Var> xv;
    for (double v : x) xv.push_back(tape.variable(v));
    std::vector<ad::Var> verts(w.size());
    const ad::Var s = eval(xv.data(), verts.data());
    const auto adj = tape.gradient(s);
    double num2 = 0.0, diff2 = 0.0;
    for (int i = 0; i < np; ++i) {
      const double a = adj[static_cast<std::size_t>(xv[static_cast<std::size_t>(i)].idx)];
      const double n = meshtri::testing::central_difference(f, x, static_cast<std::size_t>(i), 1e-6);
      num2 += n * n;
      diff2 += (a - n) * (a - n);
    }
    CHECK(std::sqrt(diff2 / num2) < 1e-4);
  }
}

TEST_CASE("regress_joints contracts") {
  BodyModel m = two_bone_chain();
  Points mesh(4, 3);
  mesh << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  const Points j = regress_joints(m, mesh);
  for (int r = 0; r < kNumRegressedJoints; ++r) CHECK(j.row(r) == mesh.row(r % 4));
  Points constant(toy().num_vertices(), 3);
  constant.rowwise() = Eigen::RowVector3d(0.3, -1.0, 2.5);
  const Points jc = regress_joints(toy(), constant);
  CHECK((jc.rowwise() - Eigen::RowVector3d(0.3, -1.0, 2.5)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(regress_joints(toy(), mesh), Error);
}

TEST_CASE("toy regressed joints agree with rest joints on the template") {
  const BodyModel& m = toy();
  const Points g = regress_joints(m, m.template_verts);
  const Points rest = rest_joints(m, std::vector<double>(kNumBetas, 0.0));
  // Every regressed joint except the head top coincides with a rest joint.
  double worst = 0.0;
  for (int r = 0; r < kNumRegressedJoints; ++r) {
    if (r == 10) {
      CHECK(g(r, 1) > rest(15, 1));
      continue;
    }
    double best = 1e9;
    for (int j = 0; j < kNumJoints; ++j) best = std::min(best, (g.row(r) - rest.row(j)).norm());
    worst = std::max(worst, best);
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("model container round trip and failure modes") {
  meshtri::testing::TempDir dir("model");
  const BodyModel& m = toy();
  const std::string path = dir.file("toy.body");
  save_model(m, path);
  CHECK(load_model(path).same_data(m));

  // Truncated blob.
  {
    std::ifstream in(path + ".bin", std::ios::binary);
    std::string blob((std::istreambuf_iterator<char>(in)), {});
    std::ofstream out(dir.file("cut.body.bin"), std::ios::binary);
    out << blob.substr(0, blob.size() / 2);
    std::ifstream hin(path);
    std::string header((std::istreambuf_iterator<char>(hin)), {});
    const std::size_t at = header.find("toy.body.bin");
    REQUIRE(at != std::string::npos);
    header.replace(at, 3, "cut");
    std::ofstream hout(dir.file("cut.body"));
    hout << header;
  }
  try {
    load_model(dir.file("cut.body"));
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }

  // Truncated header.
  {
    std::ifstream hin(path);
    std::string header((std::istreambuf_iterator<char>(hin)), {});
    std::ofstream hout(dir.file("bad.body"));
    hout << header.substr(0, header.size() / 2);
  }
  try {
    load_model(dir.file("bad.body"));
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }

  // Skin-weight row summing to 0.5.
  BodyModel broken = m;
  broken.skin_weights.row(0) *= 0.5;
  CHECK_THROWS_AS(broken.finalize(), Error);
  try {
    broken.finalize();
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvariantViolation);
  }
}
