// SPDX-License-Identifier: Apache-2.0
#include "meshtri/body_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Geometry>

#include "meshtri/toy_layout.hpp"

namespace meshtri {

bool FitParams::all_finite() const {
  auto fin = [](double v) { return std::isfinite(v); };
  return std::all_of(z.begin(), z.end(), fin) && std::all_of(rot6d.begin(), rot6d.end(), fin) &&
         std::all_of(beta.begin(), beta.end(), fin) && t.allFinite();
}

const std::array<const char*, kNumJoints>& smpl_joint_names() {
  static const std::array<const char*, kNumJoints> names = {
      "pelvis",     "left_hip",       "right_hip",      "spine1",     "left_knee",  "right_knee",
      "spine2",     "left_ankle",     "right_ankle",    "spine3",     "left_foot",  "right_foot",
      "neck",       "left_collar",    "right_collar",   "head",       "left_shoulder", "right_shoulder",
      "left_elbow", "right_elbow",    "left_wrist",     "right_wrist", "left_hand", "right_hand"};
  return names;
}

namespace {

void check_rows_sum_to_one(const RowMatrix& m, const char* what) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if ((m.row(r).array() < 0.0).any())
      throw Error(ErrorCode::InvariantViolation, std::string(what) + " row " + std::to_string(r) + " has negative entries");
    const double s = m.row(r).sum();
    if (std::abs(s - 1.0) > 1e-9)
      throw Error(ErrorCode::InvariantViolation,
                  std::string(what) + " row " + std::to_string(r) + " sums to " + std::to_string(s));
  }
}

}  // namespace

void BodyModel::finalize() {
  const int nv = num_vertices();
  const int nj = num_joints();
  if (nv <= 0 || nj <= 0) throw Error(ErrorCode::InvariantViolation, "model has no vertices or joints");
  if (!template_verts.allFinite()) throw Error(ErrorCode::InvariantViolation, "non-finite template");
  if (num_betas < 0 || shape_dirs.size() != std::size_t(nv) * 3 * num_betas)
    throw Error(ErrorCode::InvariantViolation, "shape_dirs size does not match V x 3 x B");
  if (skin_weights.rows() != nv || skin_weights.cols() != nj)
    throw Error(ErrorCode::InvariantViolation, "skin_weights must be V x J");
  if (joint_regressor.rows() != kNumRegressedJoints || joint_regressor.cols() != nv)
    throw Error(ErrorCode::InvariantViolation, "joint_regressor must be 17 x V");
  if (rest_joint_regressor.rows() != nj || rest_joint_regressor.cols() != nv)
    throw Error(ErrorCode::InvariantViolation, "rest_joint_regressor must be J x V");
  for (Eigen::Index f = 0; f < faces.rows(); ++f)
    for (int c = 0; c < 3; ++c)
      if (faces(f, c) < 0 || faces(f, c) >= nv)
        throw Error(ErrorCode::InvariantViolation, "face " + std::to_string(f) + " indexes a missing vertex");
  if (parents.empty() || parents[0] != -1) throw Error(ErrorCode::InvariantViolation, "parents[0] must be -1");
  for (int j = 1; j < nj; ++j)
    if (parents[j] < 0 || parents[j] >= j)
      throw Error(ErrorCode::InvariantViolation, "parents must be topologically ordered (joint " + std::to_string(j) + ")");
  for (const auto& h : hinge_dofs)
    if (h.joint < 1 || h.joint >= nj || h.axis < 0 || h.axis > 2 || (h.sign != 1 && h.sign != -1))
      throw Error(ErrorCode::InvariantViolation, "invalid hinge dof");
  for (int w : wrist_joints)
    if (w < 1 || w >= nj) throw Error(ErrorCode::InvariantViolation, "invalid wrist joint");
  check_rows_sum_to_one(skin_weights, "skin_weights");
  check_rows_sum_to_one(joint_regressor, "joint_regressor");
  check_rows_sum_to_one(rest_joint_regressor, "rest_joint_regressor");
  for (double v : shape_dirs)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvariantViolation, "non-finite shape_dirs");

  skin_offsets.assign(std::size_t(nv) + 1, 0);
  skin_entries.clear();
  for (int v = 0; v < nv; ++v) {
    for (int j = 0; j < nj; ++j)
      if (skin_weights(v, j) != 0.0) skin_entries.push_back({j, skin_weights(v, j)});
    skin_offsets[std::size_t(v) + 1] = skin_entries.size();
  }
  const int nb = num_betas;
  joint_template.assign(std::size_t(nj) * 3, 0.0);
  joint_shape_dirs.assign(std::size_t(nj) * 3 * nb, 0.0);
  for (int j = 0; j < nj; ++j)
    for (int v = 0; v < nv; ++v) {
      const double w = rest_joint_regressor(j, v);
      if (w == 0.0) continue;
      for (int d = 0; d < 3; ++d) {
        joint_template[std::size_t(j) * 3 + d] += w * template_verts(v, d);
        for (int b = 0; b < nb; ++b)
          joint_shape_dirs[(std::size_t(j) * 3 + d) * nb + b] += w * shape_dirs[(std::size_t(v) * 3 + d) * nb + b];
      }
    }
  regressor_rows.assign(kNumRegressedJoints, {});
  for (int r = 0; r < kNumRegressedJoints; ++r)
    for (int v = 0; v < nv; ++v)
      if (joint_regressor(r, v) != 0.0) regressor_rows[r].emplace_back(v, joint_regressor(r, v));
}

bool BodyModel::same_data(const BodyModel& o) const {
  return template_verts.rows() == o.template_verts.rows() && template_verts == o.template_verts &&
         faces.rows() == o.faces.rows() && faces == o.faces && num_betas == o.num_betas &&
         shape_dirs == o.shape_dirs && skin_weights.rows() == o.skin_weights.rows() &&
         skin_weights.cols() == o.skin_weights.cols() && skin_weights == o.skin_weights &&
         joint_regressor.cols() == o.joint_regressor.cols() && joint_regressor == o.joint_regressor &&
         rest_joint_regressor.rows() == o.rest_joint_regressor.rows() &&
         rest_joint_regressor.cols() == o.rest_joint_regressor.cols() &&
         rest_joint_regressor == o.rest_joint_regressor && parents == o.parents && hinge_dofs == o.hinge_dofs &&
         wrist_joints == o.wrist_joints;
}

Points lbs_forward(const BodyModel& model, std::span<const double> pose, const Rotation& global,
                   std::span<const double> beta, const Eigen::Vector3d& t) {
  if (static_cast<int>(pose.size()) != model.pose_dims())
    throw Error(ErrorCode::DimensionMismatch, "pose has " + std::to_string(pose.size()) + " values, model expects " +
                                                  std::to_string(model.pose_dims()));
  if (static_cast<int>(beta.size()) != model.num_betas)
    throw Error(ErrorCode::DimensionMismatch, "beta has " + std::to_string(beta.size()) + " values, model expects " +
                                                  std::to_string(model.num_betas));
  rot::Mat3<double> g;
  Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(g.data()) = global.matrix();
  const auto skel = lbs::pose_skeleton<double>(model, pose.data(), g, beta.data());
  std::vector<int> ids(static_cast<std::size_t>(model.num_vertices()));
  for (std::size_t v = 0; v < ids.size(); ++v) ids[v] = static_cast<int>(v);
  Points out(model.num_vertices(), 3);
  lbs::skin_vertices<double>(model, skel, beta.data(), t.data(), ids, out.data());
  return out;
}

Points rest_joints(const BodyModel& model, std::span<const double> beta) {
  if (static_cast<int>(beta.size()) != model.num_betas) throw Error(ErrorCode::DimensionMismatch, "beta size");
  Points j(model.num_joints(), 3);
  for (int r = 0; r < model.num_joints(); ++r)
    for (int d = 0; d < 3; ++d) {
      double v = model.joint_template[std::size_t(r) * 3 + d];
      for (int b = 0; b < model.num_betas; ++b)
        v += model.joint_shape_dirs[(std::size_t(r) * 3 + d) * model.num_betas + b] * beta[b];
      j(r, d) = v;
    }
  return j;
}

Points regress_joints(const BodyModel& model, const Points& mesh) {
  if (mesh.rows() != model.num_vertices())
    throw Error(ErrorCode::DimensionMismatch, "mesh has " + std::to_string(mesh.rows()) + " rows, model has " +
                                                  std::to_string(model.num_vertices()) + " vertices");
  return model.joint_regressor * mesh;
}

// ---------------------------------------------------------------------------
// Toy humanoid

namespace {

struct ChainPoint {
  Eigen::Vector3d pos;
  int joint;   // -1 for tube tips that are not joints
  double ra;   // half-width along the ring's first frame axis
  double rb;   // half-width along the second frame axis
};

struct Tube {
  std::vector<ChainPoint> pts;
  Eigen::Vector3d ref;  // reference direction for the ring frame
  int group;            // 0 torso, 1 left leg, 2 right leg, 3 left arm, 4 right arm
};

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3 - 2 * x);
}

// Arc-length parametrization of a tube's polyline.
struct Arc {
  std::vector<double> u;  // cumulative length at each chain point
  double total() const { return u.back(); }
  // Segment index and fraction for arc position s.
  std::pair<int, double> locate(double s) const {
    const int nseg = static_cast<int>(u.size()) - 1;
    for (int k = 0; k < nseg; ++k)
      if (s <= u[k + 1] || k == nseg - 1) return {k, std::clamp((s - u[k]) / (u[k + 1] - u[k]), 0.0, 1.0)};
    return {nseg - 1, 1.0};
  }
};

Arc make_arc(const Tube& t) {
  Arc a;
  a.u.push_back(0.0);
  for (std::size_t k = 1; k < t.pts.size(); ++k) a.u.push_back(a.u.back() + (t.pts[k].pos - t.pts[k - 1].pos).norm());
  return a;
}

constexpr double kBulge = 0.2;
// Arm rings per unit length relative to the trunk and legs.
constexpr double kArmDensity = 2.0;

int segment_owner(const Tube& t, int k) { return t.pts[k].joint >= 0 ? t.pts[k].joint : t.pts[k + 1].joint; }

}  // namespace

ToyLayout toy_layout(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const double height = 1.0 + 0.04 * uni(rng);
  const double girth = 1.0 + 0.05 * uni(rng);
  ToyLayout l;
  // Rest joint positions relative to the pelvis, meters, +y up, +z forward,
  // +x towards the body's left.
  const double base[kNumJoints][3] = {
      {0.00, 0.00, 0.00},   {0.07, -0.09, 0.00},  {-0.07, -0.09, 0.00}, {0.00, 0.11, -0.02},
      {0.10, -0.47, 0.00},  {-0.10, -0.47, 0.00}, {0.00, 0.25, 0.00},   {0.09, -0.88, -0.04},
      {-0.09, -0.88, -0.04}, {0.00, 0.30, 0.02},  {0.11, -0.94, 0.10},  {-0.11, -0.94, 0.10},
      {0.00, 0.52, -0.01},  {0.08, 0.43, 0.00},   {-0.08, 0.43, 0.00},  {0.00, 0.61, 0.04},
      {0.19, 0.45, -0.01},  {-0.19, 0.45, -0.01}, {0.45, 0.43, -0.03},  {-0.45, 0.43, -0.03},
      {0.70, 0.44, -0.03},  {-0.70, 0.44, -0.03}, {0.78, 0.44, -0.04},  {-0.78, 0.44, -0.04}};
  for (int j = 0; j < kNumJoints; ++j) l.joints[j] = height * Eigen::Vector3d(base[j][0], base[j][1], base[j][2]);
  l.head_top = height * Eigen::Vector3d(0.0, 0.80, 0.02);
  l.pelvis_bottom = height * Eigen::Vector3d(0.0, -0.12, 0.0);
  l.toe[0] = height * Eigen::Vector3d(0.11, -0.95, 0.19);
  l.toe[1] = height * Eigen::Vector3d(-0.11, -0.95, 0.19);
  l.fingertip[0] = height * Eigen::Vector3d(0.87, 0.44, -0.04);
  l.fingertip[1] = height * Eigen::Vector3d(-0.87, 0.44, -0.04);
  l.girth = girth;
  return l;
}

BodyModel make_toy_model(std::uint64_t seed, int vertex_budget) {
  if (vertex_budget < 50) throw Error(ErrorCode::InvalidArgument, "vertex_budget must be >= 50");
  const ToyLayout lay = toy_layout(seed);
  const auto& J = lay.joints;
  const double g = lay.girth;
  auto cp = [&](const Eigen::Vector3d& p, int joint, double ra, double rb) { return ChainPoint{p, joint, g * ra, g * rb}; };

  std::vector<Tube> tubes;
  tubes.push_back({{cp(lay.pelvis_bottom, -1, 0.13, 0.10), cp(J[0], 0, 0.15, 0.11), cp(J[3], 3, 0.14, 0.10),
                    cp(J[6], 6, 0.14, 0.10), cp(J[9], 9, 0.16, 0.10), cp(J[12], 12, 0.055, 0.045),
                    cp(J[15], 15, 0.075, 0.095), cp(lay.head_top, -1, 0.035, 0.04)},
                   Eigen::Vector3d::UnitX(), 0});
  for (int side = 0; side < 2; ++side) {
    const int hip = 1 + side, knee = 4 + side, ankle = 7 + side, foot = 10 + side;
    tubes.push_back({{cp(J[hip], hip, 0.08, 0.075), cp(J[knee], knee, 0.045, 0.06), cp(J[ankle], ankle, 0.035, 0.045),
                      cp(J[foot], foot, 0.045, 0.025), cp(lay.toe[side], -1, 0.035, 0.015)},
                     Eigen::Vector3d::UnitX(), 1 + side});
  }
  for (int side = 0; side < 2; ++side) {
    const int collar = 13 + side, shoulder = 16 + side, elbow = 18 + side, wrist = 20 + side, hand = 22 + side;
    tubes.push_back({{cp(J[collar], collar, 0.05, 0.045), cp(J[shoulder], shoulder, 0.05, 0.04),
                      cp(J[elbow], elbow, 0.04, 0.03), cp(J[wrist], wrist, 0.035, 0.02), cp(J[hand], hand, 0.045, 0.015),
                      cp(lay.fingertip[side], -1, 0.035, 0.012)},
                     Eigen::Vector3d::UnitZ(), 3 + side});
  }
  const std::vector<int> parents = {-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21};

  const int ntubes = static_cast<int>(tubes.size());
  const int segs_per_ring = std::clamp(static_cast<int>(std::lround(std::sqrt(vertex_budget / 8.0))), 3, 12);
  const int total_rings = std::max(2 * ntubes, static_cast<int>(std::lround(double(vertex_budget - 2 * ntubes) / segs_per_ring)));

  std::vector<Arc> arcs;
  double total_len = 0.0;
  int chain_points = 0;
  for (const auto& t : tubes) {
    arcs.push_back(make_arc(t));
    total_len += arcs.back().total();
    chain_points += static_cast<int>(t.pts.size());
  }

  // Ring arc positions per tube. With enough budget every chain point gets a
  // ring and the rest are spread by segment length; otherwise rings are
  // spread uniformly along each tube.
  std::vector<std::vector<double>> ring_pos(tubes.size());
  auto apportion = [](const std::vector<double>& lengths, int count, int min_each) {
    std::vector<int> n(lengths.size(), min_each);
    const double sum = std::accumulate(lengths.begin(), lengths.end(), 0.0);
    int left = count - min_each * static_cast<int>(lengths.size());
    std::vector<double> rem(lengths.size());
    int used = 0;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      const double share = left * lengths[i] / sum;
      const int whole = static_cast<int>(std::floor(share));
      n[i] += whole;
      used += whole;
      rem[i] = share - whole;
    }
    std::vector<std::size_t> order(lengths.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (int k = 0; k < left - used; ++k) ++n[order[static_cast<std::size_t>(k) % order.size()]];
    return n;
  };
  if (total_rings >= chain_points) {
    std::vector<double> seg_len;
    for (std::size_t t = 0; t < tubes.size(); ++t)
      for (std::size_t k = 0; k + 1 < tubes[t].pts.size(); ++k) {
        const double w = tubes[t].group >= 3 ? kArmDensity : 1.0;
        seg_len.push_back(w * (arcs[t].u[k + 1] - arcs[t].u[k]));
      }
    const auto extra = apportion(seg_len, total_rings - chain_points, 0);
    std::size_t s = 0;
    for (std::size_t t = 0; t < tubes.size(); ++t) {
      for (std::size_t k = 0; k + 1 < tubes[t].pts.size(); ++k, ++s) {
        const double a = arcs[t].u[k], b = arcs[t].u[k + 1];
        ring_pos[t].push_back(a);
        for (int r = 1; r <= extra[s]; ++r) ring_pos[t].push_back(a + (b - a) * r / (extra[s] + 1));
      }
      ring_pos[t].push_back(arcs[t].total());
    }
  } else {
    std::vector<double> lens;
    for (const auto& a : arcs) lens.push_back(a.total());
    const auto n = apportion(lens, total_rings, 2);
    for (std::size_t t = 0; t < tubes.size(); ++t)
      for (int r = 0; r < n[t]; ++r) ring_pos[t].push_back(arcs[t].total() * r / (n[t] - 1));
  }

  BodyModel m;
  m.parents = parents;
  m.num_betas = kNumBetas;
  m.hinge_dofs = {{18, 1, 1}, {19, 1, -1}, {4, 0, -1}, {5, 0, -1}};
  m.wrist_joints = {20, 21};

  std::vector<Eigen::Vector3d> verts;
  std::vector<std::array<int, 3>> faces;
  std::vector<std::vector<std::pair<int, double>>> weights;
  std::vector<Eigen::Vector3d> ring_center_of;  // per vertex
  std::vector<int> group_of;
  // Per tube: first vertex index of each ring.
  std::vector<std::vector<int>> ring_start(tubes.size());

  auto ring_weights = [&](const Tube& t, const Arc& a, double s) {
    const auto [k, f] = a.locate(s);
    std::vector<std::pair<int, double>> w;
    const int owner = segment_owner(t, k);
    const int nseg = static_cast<int>(t.pts.size()) - 1;
    double w_prev = 0.0, w_next = 0.0;
    int prev = -1, next = -1;
    if (k > 0) prev = segment_owner(t, k - 1);
    else if (t.pts[0].joint >= 0) prev = parents[t.pts[0].joint];
    if (k + 1 < nseg) next = segment_owner(t, k + 1);
    if (prev >= 0 && prev != owner) w_prev = 0.5 * smoothstep((0.3 - f) / 0.3);
    if (next >= 0 && next != owner) w_next = 0.5 * smoothstep((f - 0.7) / 0.3);
    w.emplace_back(owner, 1.0 - w_prev - w_next);
    if (w_prev > 0) w.emplace_back(prev, w_prev);
    if (w_next > 0) w.emplace_back(next, w_next);
    return w;
  };

  for (std::size_t ti = 0; ti < tubes.size(); ++ti) {
    const Tube& t = tubes[ti];
    const Arc& a = arcs[ti];
    const auto& rp = ring_pos[ti];
    const int nseg = static_cast<int>(t.pts.size()) - 1;
    std::vector<Eigen::Vector3d> centers;
    std::vector<std::vector<std::pair<int, double>>> ring_w;
    for (double s : rp) {
      const auto [k, f] = a.locate(s);
      const Eigen::Vector3d c = (1 - f) * t.pts[k].pos + f * t.pts[k + 1].pos;
      Eigen::Vector3d tan = (t.pts[k + 1].pos - t.pts[k].pos).normalized();
      if (f == 0.0 && k > 0) tan = (tan + (t.pts[k].pos - t.pts[k - 1].pos).normalized()).normalized();
      if (f == 1.0 && k + 1 < nseg) tan = (tan + (t.pts[k + 2].pos - t.pts[k + 1].pos).normalized()).normalized();
      const Eigen::Vector3d e1 = (t.ref - t.ref.dot(tan) * tan).normalized();
      const Eigen::Vector3d e2 = tan.cross(e1);
      // Muscle-like bulge between consecutive chain points.
      const double bulge = 1.0 + kBulge * std::sin(std::numbers::pi * f);
      const double ra = bulge * ((1 - f) * t.pts[k].ra + f * t.pts[k + 1].ra);
      const double rb = bulge * ((1 - f) * t.pts[k].rb + f * t.pts[k + 1].rb);
      ring_start[ti].push_back(static_cast<int>(verts.size()));
      const auto w = ring_weights(t, a, s);
      for (int q = 0; q < segs_per_ring; ++q) {
        const double phi = 2.0 * std::numbers::pi * q / segs_per_ring;
        verts.push_back(c + ra * std::cos(phi) * e1 + rb * std::sin(phi) * e2);
        weights.push_back(w);
        ring_center_of.push_back(c);
        group_of.push_back(t.group);
      }
      centers.push_back(c);
      ring_w.push_back(w);
    }
    const int nr = static_cast<int>(rp.size());
    for (int r = 0; r + 1 < nr; ++r)
      for (int q = 0; q < segs_per_ring; ++q) {
        const int q1 = (q + 1) % segs_per_ring;
        const int a0 = ring_start[ti][r] + q, a1 = ring_start[ti][r] + q1;
        const int b0 = ring_start[ti][r + 1] + q, b1 = ring_start[ti][r + 1] + q1;
        faces.push_back({a0, a1, b1});
        faces.push_back({a0, b1, b0});
      }
    // End caps: one apex vertex each, pushed out along the tube axis.
    const Eigen::Vector3d dir0 = (centers[0] - centers[1]).normalized();
    const Eigen::Vector3d dir1 = (centers[nr - 1] - centers[nr - 2]).normalized();
    const int apex0 = static_cast<int>(verts.size());
    verts.push_back(centers[0] + 0.5 * std::min(t.pts.front().ra, t.pts.front().rb) * dir0);
    weights.push_back(ring_w.front());
    ring_center_of.push_back(centers[0]);
    group_of.push_back(t.group);
    const int apex1 = static_cast<int>(verts.size());
    verts.push_back(centers[nr - 1] + 0.5 * std::min(t.pts.back().ra, t.pts.back().rb) * dir1);
    weights.push_back(ring_w.back());
    ring_center_of.push_back(centers[nr - 1]);
    group_of.push_back(t.group);
    for (int q = 0; q < segs_per_ring; ++q) {
      const int q1 = (q + 1) % segs_per_ring;
      faces.push_back({apex0, ring_start[ti][0] + q1, ring_start[ti][0] + q});
      faces.push_back({apex1, ring_start[ti][nr - 1] + q, ring_start[ti][nr - 1] + q1});
    }
  }

  const int nv = static_cast<int>(verts.size());
  m.template_verts.resize(nv, 3);
  for (int v = 0; v < nv; ++v) m.template_verts.row(v) = verts[v].transpose();
  m.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int c = 0; c < 3; ++c) m.faces(static_cast<Eigen::Index>(f), c) = faces[f][c];

  m.skin_weights = RowMatrix::Zero(nv, kNumJoints);
  for (int v = 0; v < nv; ++v)
    for (const auto& [j, w] : weights[v]) m.skin_weights(v, j) += w;

  // Regressor row for an arc position: ring-average of the bracketing rings,
  // linearly interpolated in arc length.
  auto arc_row = [&](std::size_t ti, double s) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nv);
    const auto& rp = ring_pos[ti];
    std::size_t r = 0;
    while (r + 1 < rp.size() && rp[r + 1] <= s) ++r;
    if (std::abs(rp[r] - s) < 1e-12 || r + 1 == rp.size()) {
      for (int q = 0; q < segs_per_ring; ++q) row(ring_start[ti][r] + q) = 1.0 / segs_per_ring;
    } else {
      const double f = (s - rp[r]) / (rp[r + 1] - rp[r]);
      for (int q = 0; q < segs_per_ring; ++q) {
        row(ring_start[ti][r] + q) += (1 - f) / segs_per_ring;
        row(ring_start[ti][r + 1] + q) += f / segs_per_ring;
      }
    }
    return row;
  };
  auto joint_row = [&](int joint) {
    for (std::size_t ti = 0; ti < tubes.size(); ++ti)
      for (std::size_t k = 0; k < tubes[ti].pts.size(); ++k)
        if (tubes[ti].pts[k].joint == joint) return arc_row(ti, arcs[ti].u[k]);
    throw Error(ErrorCode::InvariantViolation, "joint missing from toy layout");
  };
  m.rest_joint_regressor.resize(kNumJoints, nv);
  for (int j = 0; j < kNumJoints; ++j) m.rest_joint_regressor.row(j) = joint_row(j);
  // Human3.6M-style 17-joint subset; the head-top row uses the end of the torso tube.
  const int h36m[kNumRegressedJoints] = {0, 2, 5, 8, 1, 4, 7, 6, 12, 15, -1, 16, 18, 20, 17, 19, 21};
  m.joint_regressor.resize(kNumRegressedJoints, nv);
  for (int r = 0; r < kNumRegressedJoints; ++r)
    m.joint_regressor.row(r) = h36m[r] >= 0 ? joint_row(h36m[r]) : arc_row(0, arcs[0].total());
  // Force exact unit row sums after the floating-point accumulation above.
  for (Eigen::Index r = 0; r < m.joint_regressor.rows(); ++r) m.joint_regressor.row(r) /= m.joint_regressor.row(r).sum();
  for (Eigen::Index r = 0; r < m.rest_joint_regressor.rows(); ++r)
    m.rest_joint_regressor.row(r) /= m.rest_joint_regressor.row(r).sum();

  // Shape directions: smooth, centimeter-scale deformations per unit beta.
  std::mt19937_64 rng(seed * 6364136223846793005ULL + 1442695040888963407ULL);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double freq[2][3][3], phase[2][3];
  for (auto& f : freq)
    for (auto& r : f)
      for (double& x : r) x = 2.0 + 2.0 * uni(rng);
  for (auto& p : phase)
    for (double& x : p) x = std::numbers::pi * uni(rng);
  const int nb = kNumBetas;
  m.shape_dirs.assign(std::size_t(nv) * 3 * nb, 0.0);
  auto set = [&](int v, int b, const Eigen::Vector3d& d) {
    for (int k = 0; k < 3; ++k) m.shape_dirs[(std::size_t(v) * 3 + k) * nb + b] = d[k];
  };
  const Eigen::Vector3d hip_center[2] = {J[1], J[2]};
  const Eigen::Vector3d collar[2] = {J[13], J[14]};
  for (int v = 0; v < nv; ++v) {
    const Eigen::Vector3d p = verts[v];
    const int grp = group_of[v];
    set(v, 0, 0.03 * p);
    set(v, 1, 0.15 * (p - ring_center_of[v]));
    if (grp == 1 || grp == 2) set(v, 2, 0.04 * (p - hip_center[grp - 1]));
    if (grp == 3 || grp == 4) set(v, 3, 0.04 * (p - collar[grp - 3]));
    if (grp == 0) set(v, 4, Eigen::Vector3d(0.0, 0.04 * p.y(), 0.0));
    if (grp == 0) {
      const double bump = std::exp(-std::pow((p.y() - 0.18) / 0.12, 2));
      const Eigen::Vector3d radial = p - ring_center_of[v];
      set(v, 5, Eigen::Vector3d(0.0, 0.0, 0.03 * bump * std::max(0.0, radial.z()) / std::max(1e-9, radial.norm())));
    }
    if (grp == 3 || grp == 4) set(v, 6, Eigen::Vector3d(grp == 3 ? 0.03 : -0.03, 0.0, 0.0));
    if (grp == 1 || grp == 2) set(v, 7, Eigen::Vector3d(grp == 1 ? 0.02 : -0.02, 0.0, 0.0));
    for (int b = 0; b < 2; ++b) {
      Eigen::Vector3d d;
      for (int k = 0; k < 3; ++k)
        d[k] = 0.01 * std::sin(freq[b][k][0] * p.x() + freq[b][k][1] * p.y() + freq[b][k][2] * p.z() + phase[b][k]);
      set(v, 8 + b, d);
    }
  }
  m.finalize();
  return m;
}

}  // namespace meshtri
